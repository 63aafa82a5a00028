//! Inputs to summability methods: lazily evaluated `ℂ^d`-valued sequences
//! on `ℕ` and functions on half-open intervals.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::vspace::{LinearFunctional, Scalar, Space, Vector};

/// Streams consecutive terms of a sequence.
pub trait TermCursor {
    /// Writes the next `out.len() / dim` terms, coordinates contiguous.
    fn fill(&mut self, out: &mut [Scalar]);
}

/// Random access to the terms of a `ℂ^d`-valued sequence.
///
/// Implementations must be callable from several threads at once.
pub trait Terms: Send + Sync {
    fn dim(&self) -> usize;

    fn term_into(&self, n: u64, out: &mut [Scalar]);

    /// A cursor positioned at index `start`. Override when consecutive terms
    /// are much cheaper to produce than isolated ones.
    fn cursor(&self, start: u64) -> Box<dyn TermCursor + '_> {
        Box::new(RandomAccess {
            terms: self,
            next: start,
        })
    }
}

struct RandomAccess<'a, T: ?Sized> {
    terms: &'a T,
    next: u64,
}

impl<T: Terms + ?Sized> TermCursor for RandomAccess<'_, T> {
    fn fill(&mut self, out: &mut [Scalar]) {
        let d = self.terms.dim();
        for chunk in out.chunks_exact_mut(d) {
            self.terms.term_into(self.next, chunk);
            self.next += 1;
        }
    }
}

struct FnTerms<F> {
    dim: usize,
    f: F,
}

impl<F> Terms for FnTerms<F>
where
    F: Fn(u64, &mut [Scalar]) + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn term_into(&self, n: u64, out: &mut [Scalar]) {
        (self.f)(n, out)
    }
}

/// `v_n = L + ρ^n u`.
struct GeometricApproach {
    limit: Vec<Scalar>,
    rho: Scalar,
    u: Vec<Scalar>,
}

impl Terms for GeometricApproach {
    fn dim(&self) -> usize {
        self.limit.len()
    }

    fn term_into(&self, n: u64, out: &mut [Scalar]) {
        let p = scalar_pow(self.rho, n);
        for ((o, l), u) in out.iter_mut().zip(&self.limit).zip(&self.u) {
            *o = l + p * u;
        }
    }

    fn cursor(&self, start: u64) -> Box<dyn TermCursor + '_> {
        Box::new(GeometricCursor {
            src: self,
            next: start,
        })
    }
}

struct GeometricCursor<'a> {
    src: &'a GeometricApproach,
    next: u64,
}

impl TermCursor for GeometricCursor<'_> {
    fn fill(&mut self, out: &mut [Scalar]) {
        let d = self.src.limit.len();
        // Re-anchor the power once per block so rounding does not drift.
        let mut p = scalar_pow(self.src.rho, self.next);
        for chunk in out.chunks_exact_mut(d) {
            for ((o, l), u) in chunk.iter_mut().zip(&self.src.limit).zip(&self.src.u) {
                *o = l + p * u;
            }
            p *= self.src.rho;
            self.next += 1;
        }
    }
}

/// `ρ^n` with exact handling of real and purely sign-alternating bases.
pub(crate) fn scalar_pow(rho: Scalar, n: u64) -> Scalar {
    if n == 0 {
        return Scalar::new(1.0, 0.0);
    }
    if rho.im == 0.0 {
        let e = i32::try_from(n).ok();
        let re = match e {
            Some(e) => rho.re.powi(e),
            None => rho.re.abs().powf(n as f64) * if rho.re < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 },
        };
        return Scalar::new(re, 0.0);
    }
    Scalar::from_polar(rho.norm().powf(n as f64), rho.arg() * n as f64)
}

/// Partial sums `s_n = Σ_{k≤n} v_k` of an underlying sequence.
struct PartialSums {
    inner: SequenceSource,
}

impl Terms for PartialSums {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn term_into(&self, n: u64, out: &mut [Scalar]) {
        out.fill(Scalar::new(0.0, 0.0));
        let mut cur = PartialSumCursor::new(&self.inner, 0);
        for _ in 0..=n {
            cur.fill(out);
        }
    }

    fn cursor(&self, start: u64) -> Box<dyn TermCursor + '_> {
        Box::new(PartialSumCursor::new(&self.inner, start))
    }
}

struct PartialSumCursor<'a> {
    inner: Box<dyn TermCursor + 'a>,
    acc: Vec<Scalar>,
}

impl<'a> PartialSumCursor<'a> {
    fn new(src: &'a SequenceSource, start: u64) -> Self {
        let d = src.dim();
        let mut inner = src.cursor(0);
        let mut acc = vec![Scalar::new(0.0, 0.0); d];
        let mut buf = vec![Scalar::new(0.0, 0.0); d];
        for _ in 0..start {
            inner.fill(&mut buf);
            for (a, b) in acc.iter_mut().zip(&buf) {
                *a += b;
            }
        }
        PartialSumCursor { inner, acc }
    }
}

impl TermCursor for PartialSumCursor<'_> {
    fn fill(&mut self, out: &mut [Scalar]) {
        let d = self.acc.len();
        self.inner.fill(out);
        for chunk in out.chunks_exact_mut(d) {
            for (a, o) in self.acc.iter_mut().zip(chunk.iter_mut()) {
                *a += *o;
                *o = *a;
            }
        }
    }
}

/// A lazily evaluated sequence `(v_n)_{n≥0}` in a fixed space.
#[derive(Clone)]
pub struct SequenceSource {
    space: Space,
    terms: Arc<dyn Terms>,
    stable_from: Option<u64>,
    label: String,
}

impl fmt::Debug for SequenceSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SequenceSource")
            .field("space", &self.space)
            .field("stable_from", &self.stable_from)
            .field("label", &self.label)
            .finish()
    }
}

impl SequenceSource {
    pub fn from_terms(space: Space, terms: Arc<dyn Terms>) -> Result<Self> {
        space.check_len(terms.dim())?;
        Ok(SequenceSource {
            space,
            terms,
            stable_from: None,
            label: String::from("sequence"),
        })
    }

    /// `f(n, out)` writes the coordinates of `v_n` into `out`.
    pub fn from_fn<F>(space: Space, f: F) -> Self
    where
        F: Fn(u64, &mut [Scalar]) + Send + Sync + 'static,
    {
        SequenceSource {
            space,
            terms: Arc::new(FnTerms { dim: space.dim(), f }),
            stable_from: None,
            label: String::from("sequence"),
        }
    }

    pub fn scalar_fn<F>(f: F) -> Self
    where
        F: Fn(u64) -> Scalar + Send + Sync + 'static,
    {
        Self::from_fn(Space::scalar(), move |n, out| out[0] = f(n))
    }

    pub fn constant(x: Vector) -> Self {
        let coords = x.coords().to_vec();
        Self::from_fn(x.space(), move |_, out| out.copy_from_slice(&coords))
            .with_stable_from(0)
            .with_label("constant")
    }

    /// `v_n = L + ρ^n u`.
    pub fn geometric_approach(limit: &Vector, rho: Scalar, u: &Vector) -> Result<Self> {
        if limit.dim() != u.dim() {
            return Err(Error::DimensionMismatch {
                expected: limit.dim(),
                found: u.dim(),
            });
        }
        let terms = GeometricApproach {
            limit: limit.coords().to_vec(),
            rho,
            u: u.coords().to_vec(),
        };
        let mut s = Self::from_terms(limit.space(), Arc::new(terms))?;
        if rho == Scalar::new(0.0, 0.0) {
            s.stable_from = Some(1);
        }
        Ok(s.with_label("geometric_approach"))
    }

    /// The partial-sum sequence of `series`: methods applied to it sum the
    /// series `Σ v_k`.
    pub fn partial_sums(series: SequenceSource) -> Self {
        let space = series.space;
        let label = format!("partial_sums({})", series.label);
        SequenceSource {
            space,
            terms: Arc::new(PartialSums { inner: series }),
            stable_from: None,
            label,
        }
    }

    /// `n ↦ φ(v_n)` as a scalar sequence.
    pub fn map_functional(&self, phi: &LinearFunctional) -> Result<Self> {
        if phi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: phi.dim(),
            });
        }
        let inner = self.clone();
        let phi = phi.clone();
        let d = self.dim();
        let src = Self::from_fn(Space::scalar(), move |n, out| {
            let mut buf = vec![Scalar::new(0.0, 0.0); d];
            inner.term_into(n, &mut buf);
            out[0] = phi.apply_coords(&buf).expect("dimension checked");
        });
        Ok(SequenceSource {
            stable_from: self.stable_from,
            label: format!("functional({})", self.label),
            ..src
        })
    }

    /// `n ↦ α u_n + β v_n`.
    pub fn linear_combination(alpha: Scalar, u: &SequenceSource, beta: Scalar, v: &SequenceSource) -> Result<Self> {
        if u.dim() != v.dim() {
            return Err(Error::DimensionMismatch {
                expected: u.dim(),
                found: v.dim(),
            });
        }
        let (u2, v2) = (u.clone(), v.clone());
        let d = u.dim();
        let src = Self::from_fn(u.space, move |n, out| {
            let mut a = vec![Scalar::new(0.0, 0.0); d];
            u2.term_into(n, &mut a);
            v2.term_into(n, out);
            for (o, x) in out.iter_mut().zip(&a) {
                *o = alpha * x + beta * *o;
            }
        });
        let stable_from = match (u.stable_from, v.stable_from) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        Ok(SequenceSource {
            stable_from,
            label: String::from("linear_combination"),
            ..src
        })
    }

    /// Declares `v_n = v_{n0}` for every `n ≥ n0`. Engines use this to sum
    /// the constant tail in closed form; declaring it for a sequence that is
    /// not eventually constant gives wrong results.
    pub fn with_stable_from(mut self, n0: u64) -> Self {
        self.stable_from = Some(n0);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn stable_from(&self) -> Option<u64> {
        self.stable_from
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn term_into(&self, n: u64, out: &mut [Scalar]) {
        self.terms.term_into(n, out)
    }

    pub fn term(&self, n: u64) -> Result<Vector> {
        let mut out = vec![Scalar::new(0.0, 0.0); self.dim()];
        self.term_into(n, &mut out);
        Vector::new(self.space, out)
    }

    pub fn cursor(&self, start: u64) -> Box<dyn TermCursor + '_> {
        self.terms.cursor(start)
    }
}

type ValueFn = dyn Fn(f64, &mut [Scalar]) + Send + Sync;

/// A function `v : [0, R) → ℂ^d`.
#[derive(Clone)]
pub struct FunctionSource {
    space: Space,
    f: Arc<ValueFn>,
    label: String,
}

impl fmt::Debug for FunctionSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionSource")
            .field("space", &self.space)
            .field("label", &self.label)
            .finish()
    }
}

impl FunctionSource {
    pub fn from_fn<F>(space: Space, f: F) -> Self
    where
        F: Fn(f64, &mut [Scalar]) + Send + Sync + 'static,
    {
        FunctionSource {
            space,
            f: Arc::new(f),
            label: String::from("function"),
        }
    }

    pub fn scalar_fn<F>(f: F) -> Self
    where
        F: Fn(f64) -> Scalar + Send + Sync + 'static,
    {
        Self::from_fn(Space::scalar(), move |t, out| out[0] = f(t))
    }

    pub fn constant(x: Vector) -> Self {
        let coords = x.coords().to_vec();
        Self::from_fn(x.space(), move |_, out| out.copy_from_slice(&coords)).with_label("constant")
    }

    pub fn map_functional(&self, phi: &LinearFunctional) -> Result<Self> {
        if phi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: phi.dim(),
            });
        }
        let inner = self.clone();
        let phi = phi.clone();
        let d = self.dim();
        Ok(Self::from_fn(Space::scalar(), move |t, out| {
            let mut buf = vec![Scalar::new(0.0, 0.0); d];
            inner.value_into(t, &mut buf);
            out[0] = phi.apply_coords(&buf).expect("dimension checked");
        })
        .with_label(format!("functional({})", self.label)))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn value_into(&self, t: f64, out: &mut [Scalar]) {
        (self.f)(t, out)
    }

    pub fn value(&self, t: f64) -> Result<Vector> {
        let mut out = vec![Scalar::new(0.0, 0.0); self.dim()];
        self.value_into(t, &mut out);
        Vector::new(self.space, out)
    }
}

/// Input to a method: a sequence on `ℕ` or a function on an interval.
#[derive(Debug, Clone)]
pub enum Source {
    Sequence(SequenceSource),
    Function(FunctionSource),
}

impl Source {
    pub fn space(&self) -> Space {
        match self {
            Source::Sequence(s) => s.space(),
            Source::Function(f) => f.space(),
        }
    }

    pub fn label(&self) -> &str {
        match self {
            Source::Sequence(s) => s.label(),
            Source::Function(f) => f.label(),
        }
    }

    pub fn map_functional(&self, phi: &LinearFunctional) -> Result<Source> {
        Ok(match self {
            Source::Sequence(s) => Source::Sequence(s.map_functional(phi)?),
            Source::Function(f) => Source::Function(f.map_functional(phi)?),
        })
    }
}

impl From<SequenceSource> for Source {
    fn from(s: SequenceSource) -> Self {
        Source::Sequence(s)
    }
}

impl From<FunctionSource> for Source {
    fn from(f: FunctionSource) -> Self {
        Source::Function(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vspace::NormKind;

    fn alt() -> SequenceSource {
        SequenceSource::scalar_fn(|n| Scalar::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
    }

    #[test]
    fn partial_sums_of_alternating_series() {
        let s = SequenceSource::partial_sums(alt());
        let got: Vec<f64> = (0..6).map(|n| s.term(n).unwrap().coords()[0].re).collect();
        assert_eq!(got, vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        let mut cur = s.cursor(3);
        let mut buf = vec![Scalar::new(0.0, 0.0); 3];
        cur.fill(&mut buf);
        assert_eq!(buf.iter().map(|z| z.re).collect::<Vec<_>>(), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn geometric_cursor_matches_random_access() {
        let sp = Space::new(2, NormKind::L2).unwrap();
        let l = Vector::from_reals(sp, &[1.0, -0.5]).unwrap();
        let u = Vector::from_reals(sp, &[0.25, 2.0]).unwrap();
        let s = SequenceSource::geometric_approach(&l, Scalar::new(-0.7, 0.1), &u).unwrap();
        let mut cur = s.cursor(5);
        let mut buf = vec![Scalar::new(0.0, 0.0); 2 * 40];
        cur.fill(&mut buf);
        for (i, chunk) in buf.chunks(2).enumerate() {
            let t = s.term(5 + i as u64).unwrap();
            for (a, b) in chunk.iter().zip(t.coords()) {
                assert!((a - b).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn scalar_pow_exact_signs() {
        assert_eq!(scalar_pow(Scalar::new(-1.0, 0.0), 7), Scalar::new(-1.0, 0.0));
        assert_eq!(scalar_pow(Scalar::new(0.5, 0.0), 3), Scalar::new(0.125, 0.0));
    }

    #[test]
    fn functional_view() {
        let sp = Space::new(2, NormKind::L1).unwrap();
        let v = SequenceSource::from_fn(sp, |n, out| {
            out[0] = Scalar::new(n as f64, 0.0);
            out[1] = Scalar::new(1.0, 0.0);
        });
        let phi = LinearFunctional::coordinate(2, 0).unwrap();
        assert_eq!(v.map_functional(&phi).unwrap().term(4).unwrap().coords()[0].re, 4.0);
        assert!(v.map_functional(&LinearFunctional::zero(3)).is_err());
    }
}
