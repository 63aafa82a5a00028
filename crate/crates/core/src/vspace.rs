//! Finite-dimensional complex normed spaces, their elements, linear
//! functionals and bounded operators.
//!
//! The Banach space `X` of the theory is modelled as `ℂ^d` with one of three
//! norms. Coordinate functionals form a norming set, so weak statements can
//! be checked against finitely many functionals.

use std::fmt;
use std::ops::{Add, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Scalar = Complex64;

pub const DEFAULT_DIM: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    L1,
    L2,
    Sup,
}

impl NormKind {
    /// The norm of the dual space under the pairing `φ(v) = Σ w_j v_j`.
    pub fn dual(self) -> NormKind {
        match self {
            NormKind::L1 => NormKind::Sup,
            NormKind::L2 => NormKind::L2,
            NormKind::Sup => NormKind::L1,
        }
    }

    pub fn eval(self, coords: &[Scalar]) -> f64 {
        match self {
            NormKind::L1 => coords.iter().map(|z| z.norm()).sum(),
            NormKind::L2 => coords.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
            NormKind::Sup => coords.iter().map(|z| z.norm()).fold(0.0, f64::max),
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormKind::L1 => "l1",
            NormKind::L2 => "l2",
            NormKind::Sup => "sup",
        })
    }
}

/// Upper bound for every supported norm: `Σ (|Re z| + |Im z|)`.
///
/// Used by tail certificates, which only need an upper bound and run once
/// per summed term.
#[inline]
pub(crate) fn norm_upper_bound(coords: &[Scalar]) -> f64 {
    coords.iter().map(|z| z.re.abs() + z.im.abs()).sum()
}

/// `ℂ^d` together with a norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Space {
    dim: usize,
    norm: NormKind,
}

impl Space {
    pub fn new(dim: usize, norm: NormKind) -> Result<Self> {
        if dim == 0 {
            return Err(Error::usage("space dimension must be positive"));
        }
        Ok(Space { dim, norm })
    }

    /// `ℂ` with the modulus.
    pub fn scalar() -> Self {
        Space {
            dim: 1,
            norm: NormKind::L2,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm_kind(&self) -> NormKind {
        self.norm
    }

    pub fn zero(&self) -> Vector {
        Vector {
            space: *self,
            coords: vec![Scalar::new(0.0, 0.0); self.dim],
        }
    }

    pub fn basis(&self, k: usize) -> Result<Vector> {
        if k >= self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: k + 1,
            });
        }
        let mut v = self.zero();
        v.coords[k] = Scalar::new(1.0, 0.0);
        Ok(v)
    }

    /// Norm of a raw coordinate slice, checked against the dimension.
    pub fn norm(&self, coords: &[Scalar]) -> Result<f64> {
        self.check_len(coords.len())?;
        Ok(self.norm.eval(coords))
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: len,
            });
        }
        Ok(())
    }
}

/// An element of a [`Space`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Vector {
    space: Space,
    coords: Vec<Scalar>,
}

impl Vector {
    pub fn new(space: Space, coords: Vec<Scalar>) -> Result<Self> {
        space.check_len(coords.len())?;
        if !coords.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite("vector coordinates"));
        }
        Ok(Vector { space, coords })
    }

    pub fn from_reals(space: Space, reals: &[f64]) -> Result<Self> {
        Self::new(space, reals.iter().map(|&x| Scalar::new(x, 0.0)).collect())
    }

    /// A value of the scalar space `ℂ`.
    pub fn scalar(z: Scalar) -> Self {
        Vector {
            space: Space::scalar(),
            coords: vec![z],
        }
    }

    pub(crate) fn from_parts_unchecked(space: Space, coords: Vec<Scalar>) -> Self {
        debug_assert_eq!(space.dim, coords.len());
        Vector { space, coords }
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    pub fn coords(&self) -> &[Scalar] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<Scalar> {
        self.coords
    }

    pub fn norm(&self) -> f64 {
        self.space.norm.eval(&self.coords)
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(&self, c: Scalar) -> Vector {
        Vector {
            space: self.space,
            coords: self.coords.iter().map(|z| z * c).collect(),
        }
    }

    /// `self += a · x`.
    ///
    /// # Panics
    /// If the two vectors live in spaces of different dimension.
    pub fn axpy(&mut self, a: Scalar, x: &Vector) {
        assert_eq!(self.dim(), x.dim(), "axpy across spaces of different dimension");
        for (s, xi) in self.coords.iter_mut().zip(&x.coords) {
            *s += a * xi;
        }
    }

    /// `‖self − other‖` in the norm of `self`'s space.
    pub fn distance(&self, other: &Vector) -> f64 {
        (self - other).norm()
    }

    /// Re-interprets the coordinates under another norm of the same dimension.
    pub fn with_norm(&self, norm: NormKind) -> Vector {
        Vector {
            space: Space {
                dim: self.space.dim,
                norm,
            },
            coords: self.coords.clone(),
        }
    }
}

impl<'a> Add for &'a Vector {
    type Output = Vector;

    fn add(self, rhs: &'a Vector) -> Vector {
        assert_eq!(self.dim(), rhs.dim(), "adding vectors of different dimension");
        Vector {
            space: self.space,
            coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub for &'a Vector {
    type Output = Vector;

    fn sub(self, rhs: &'a Vector) -> Vector {
        assert_eq!(self.dim(), rhs.dim(), "subtracting vectors of different dimension");
        Vector {
            space: self.space,
            coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a - b).collect(),
        }
    }
}

/// `φ(v) = Σ_j w_j v_j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearFunctional {
    weights: Vec<Scalar>,
}

impl LinearFunctional {
    pub fn new(weights: Vec<Scalar>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::usage("functional needs at least one weight"));
        }
        if !weights.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite("functional weights"));
        }
        Ok(LinearFunctional { weights })
    }

    pub fn coordinate(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: k + 1,
            });
        }
        let mut weights = vec![Scalar::new(0.0, 0.0); dim];
        weights[k] = Scalar::new(1.0, 0.0);
        Ok(LinearFunctional { weights })
    }

    pub fn zero(dim: usize) -> Self {
        LinearFunctional {
            weights: vec![Scalar::new(0.0, 0.0); dim],
        }
    }

    /// All coordinate functionals of `ℂ^dim`.
    pub fn coordinates(dim: usize) -> Vec<Self> {
        (0..dim)
            .map(|k| Self::coordinate(dim, k).expect("k < dim"))
            .collect()
    }

    pub fn weights(&self) -> &[Scalar] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn apply(&self, v: &Vector) -> Result<Scalar> {
        self.apply_coords(v.coords())
    }

    pub fn apply_coords(&self, coords: &[Scalar]) -> Result<Scalar> {
        if coords.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                found: coords.len(),
            });
        }
        Ok(self.weights.iter().zip(coords).map(|(w, x)| w * x).sum())
    }

    /// Operator norm of `φ` on `(ℂ^d, norm)`.
    pub fn dual_norm(&self, norm: NormKind) -> f64 {
        norm.dual().eval(&self.weights)
    }
}

/// A bounded operator `ℂ^cols → ℂ^rows`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Operator {
    rows: usize,
    cols: usize,
    entries: Vec<Scalar>,
}

impl Operator {
    pub fn new(rows: usize, cols: usize, entries: Vec<Scalar>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::usage("operator dimensions must be positive"));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        if !entries.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite("operator entries"));
        }
        Ok(Operator {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Scalar) -> Result<Self> {
        let entries = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .map(|(i, j)| f(i, j))
            .collect();
        Self::new(rows, cols, entries)
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![Scalar::new(1.0, 0.0); dim])
    }

    pub fn diagonal(diag: &[Scalar]) -> Self {
        let d = diag.len();
        let mut entries = vec![Scalar::new(0.0, 0.0); d * d];
        for (i, z) in diag.iter().enumerate() {
            entries[i * d + i] = *z;
        }
        Operator {
            rows: d,
            cols: d,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> Scalar {
        self.entries[i * self.cols + j]
    }

    pub(crate) fn apply_into(&self, x: &[Scalar], out: &mut [Scalar]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.entries[i * self.cols..(i + 1) * self.cols];
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    /// `T x`, landing in `target` (whose dimension must equal `rows`).
    pub fn apply(&self, x: &Vector, target: Space) -> Result<Vector> {
        if x.dim() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: x.dim(),
            });
        }
        target.check_len(self.rows)?;
        let mut out = vec![Scalar::new(0.0, 0.0); self.rows];
        self.apply_into(x.coords(), &mut out);
        Ok(Vector::from_parts_unchecked(target, out))
    }

    /// `T x` in the space of `x` (square operators).
    pub fn apply_same(&self, x: &Vector) -> Result<Vector> {
        self.apply(x, x.space())
    }

    pub fn mul(&self, rhs: &Operator) -> Result<Operator> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: rhs.rows,
            });
        }
        Operator::from_fn(self.rows, rhs.cols, |i, j| {
            (0..self.cols).map(|k| self.entry(i, k) * rhs.entry(k, j)).sum()
        })
    }
}

/// Numerical rank by Gaussian elimination with partial pivoting.
pub fn rank(vectors: &[Vector], tol: f64) -> usize {
    let Some(first) = vectors.first() else {
        return 0;
    };
    let cols = first.dim();
    let mut m: Vec<Vec<Scalar>> = vectors.iter().map(|v| v.coords().to_vec()).collect();
    let mut rank = 0;
    for c in 0..cols {
        let pivot = (rank..m.len()).max_by(|&a, &b| m[a][c].norm().total_cmp(&m[b][c].norm()));
        let Some(p) = pivot else { break };
        if m[p][c].norm() <= tol {
            continue;
        }
        m.swap(rank, p);
        let pivot_row = m[rank].clone();
        for row in m.iter_mut().skip(rank + 1) {
            let f = row[c] / pivot_row[c];
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x -= f * y;
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Scalar {
        Scalar::new(re, im)
    }

    #[test]
    fn norm_examples() {
        for kind in [NormKind::L1, NormKind::L2, NormKind::Sup] {
            let s = Space::new(3, kind).unwrap();
            assert_eq!(s.zero().norm(), 0.0);
        }
        let v = Vector::new(Space::scalar(), vec![c(3.0, 4.0)]).unwrap();
        assert_eq!(v.norm(), 5.0);
        let s = Space::new(3, NormKind::L1).unwrap();
        let v = Vector::from_reals(s, &[1.0, -1.0, 1.0]).unwrap();
        assert_eq!(v.norm(), 3.0);
    }

    #[test]
    fn norm_rejects_wrong_length() {
        let s = Space::new(2, NormKind::L2).unwrap();
        assert!(matches!(
            s.norm(&[c(1.0, 0.0)]),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
        assert!(Vector::new(s, vec![c(1.0, 0.0); 3]).is_err());
    }

    #[test]
    fn vector_rejects_nan() {
        assert!(Vector::new(Space::scalar(), vec![c(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn functional_examples() {
        let s = Space::new(2, NormKind::L2).unwrap();
        let e1 = LinearFunctional::coordinate(2, 0).unwrap();
        let v = Vector::from_reals(s, &[7.0, 2.0]).unwrap();
        assert_eq!(e1.apply(&v).unwrap(), c(7.0, 0.0));
        assert_eq!(LinearFunctional::zero(2).apply(&v).unwrap(), c(0.0, 0.0));
        let sum = LinearFunctional::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let w = Vector::new(s, vec![c(0.0, 1.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(sum.apply(&w).unwrap(), c(1.0, 1.0));
        assert!(sum.apply(&Vector::scalar(c(1.0, 0.0))).is_err());
    }

    #[test]
    fn dual_norms() {
        let phi = LinearFunctional::new(vec![c(1.0, 0.0), c(-2.0, 0.0)]).unwrap();
        assert_eq!(phi.dual_norm(NormKind::L1), 2.0);
        assert_eq!(phi.dual_norm(NormKind::Sup), 3.0);
        assert!((phi.dual_norm(NormKind::L2) - 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn operator_apply_and_rank() {
        let s = Space::new(2, NormKind::L2).unwrap();
        let t = Operator::new(2, 2, vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let x = Vector::from_reals(s, &[1.0, 2.0]).unwrap();
        assert_eq!(t.apply_same(&x).unwrap().coords(), &[c(2.0, 0.0), c(1.0, 0.0)]);
        let basis: Vec<_> = (0..2).map(|k| s.basis(k).unwrap()).collect();
        assert_eq!(rank(&basis, 1e-12), 2);
        assert_eq!(rank(&[x.clone(), x.scale(c(2.0, 0.0))], 1e-12), 1);
    }
}
