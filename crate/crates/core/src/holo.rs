//! Taylor series in Banach spaces of holomorphic functions on the unit disk:
//! partial sums, Abel dilates, logarithmic means, and summability
//! experiments measuring `‖M_p(f) − f‖` along a parameter grid.
//!
//! Each operation acts on Taylor coefficients through a multiplier:
//! `S_n` keeps `a_k` for `k ≤ n`, `A_r` multiplies `a_k` by `r^k`, and `L_r`
//! multiplies by `λ_k(r) = −(1/log(1−r)) ∫_0^r t^k/(1−t) dt`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domains::{estimate_limit_at_infinity, parameter_grid, ConvergenceEstimate, IndexDomain, LimitConfig, Status};
use crate::error::{Error, Result};
use crate::integrate::{adaptive_quadrature, QuadratureConfig, Substitution};
use crate::methods::TruncationPolicy;
use crate::vspace::{NormKind, Scalar, Space, Vector};

pub const DEFAULT_DISK_POINTS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BhfdSpace {
    /// `‖f‖ = (Σ |a_k|²)^{1/2}`.
    H2,
    /// `‖f‖ = Σ |a_k|`.
    Wiener,
    /// Max modulus on `points` equispaced boundary points: a lower estimate
    /// of the disk-algebra norm, reported with an `ℓ¹` tail bound.
    DiskGrid { points: usize },
}

impl BhfdSpace {
    pub fn disk_grid() -> Self {
        BhfdSpace::DiskGrid {
            points: DEFAULT_DISK_POINTS,
        }
    }

    pub fn label(&self) -> String {
        match self {
            BhfdSpace::H2 => "h2".into(),
            BhfdSpace::Wiener => "wiener".into(),
            BhfdSpace::DiskGrid { points } => format!("disk_grid({points})"),
        }
    }

    /// `‖z^k‖`, equal to 1 in all three spaces, so
    /// `limsup ‖z^k‖^{1/k} ≤ 1` holds (and so does the reading without the
    /// `1/k` exponent).
    pub fn monomial_norm(&self, k: u64) -> f64 {
        let mut c = vec![Scalar::new(0.0, 0.0); k as usize + 1];
        c[k as usize] = Scalar::new(1.0, 0.0);
        self.norm_of(&c)
    }

    /// Norm of a finitely supported coefficient vector.
    pub fn norm_of(&self, coeffs: &[Scalar]) -> f64 {
        match *self {
            BhfdSpace::H2 => NormKind::L2.eval(coeffs),
            BhfdSpace::Wiener => NormKind::L1.eval(coeffs),
            BhfdSpace::DiskGrid { points } => boundary_max(coeffs, points),
        }
    }

    /// Bound on the norm of the coefficients beyond `k`, given their `ℓ²`
    /// and `ℓ¹` tail bounds.
    fn tail_norm(&self, l2: f64, l1: f64) -> f64 {
        match self {
            BhfdSpace::H2 => l2,
            BhfdSpace::Wiener | BhfdSpace::DiskGrid { .. } => l1,
        }
    }
}

fn boundary_max(coeffs: &[Scalar], points: usize) -> f64 {
    if coeffs.is_empty() {
        return 0.0;
    }
    (0..points.max(1))
        .map(|j| {
            let z = Scalar::from_polar(1.0, 2.0 * PI * j as f64 / points.max(1) as f64);
            coeffs.iter().rev().fold(Scalar::new(0.0, 0.0), |acc, a| acc * z + a).norm()
        })
        .fold(0.0, f64::max)
}

/// Declared decay of the Taylor coefficients: `|a_k| ≤ c · bound(k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecayClass {
    FinitelySupported { degree: u64 },
    Geometric { c: f64, rho: f64 },
    PowerLaw { c: f64, alpha: f64 },
}

impl DecayClass {
    fn bound(&self, k: u64) -> f64 {
        match *self {
            DecayClass::FinitelySupported { degree } => if k <= degree { f64::INFINITY } else { 0.0 },
            DecayClass::Geometric { c, rho } => c * rho.powf(k as f64),
            DecayClass::PowerLaw { c, alpha } => c * (k as f64 + 1.0).powf(-alpha),
        }
    }

    /// Upper bounds for the `ℓ²` and `ℓ¹` norms of `(a_k)_{k > n}`.
    fn tail_bounds(&self, n: u64) -> (f64, f64) {
        match *self {
            DecayClass::FinitelySupported { degree } => {
                if n >= degree {
                    (0.0, 0.0)
                } else {
                    (f64::INFINITY, f64::INFINITY)
                }
            }
            DecayClass::Geometric { c, rho } => {
                let head = c * rho.powf(n as f64 + 1.0);
                (head / (1.0 - rho * rho).sqrt(), head / (1.0 - rho))
            }
            DecayClass::PowerLaw { c, alpha } => {
                // Σ_{k>n} (k+1)^{−s} ≤ ∫_{n+1}^∞ x^{−s} dx for s > 1.
                let x = n as f64 + 1.0;
                let l2 = if 2.0 * alpha > 1.0 {
                    c * (x.powf(1.0 - 2.0 * alpha) / (2.0 * alpha - 1.0)).sqrt()
                } else {
                    f64::INFINITY
                };
                let l1 = if alpha > 1.0 {
                    c * x.powf(1.0 - alpha) / (alpha - 1.0)
                } else {
                    f64::INFINITY
                };
                (l2, l1)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            DecayClass::FinitelySupported { .. } => true,
            DecayClass::Geometric { c, rho } => c >= 0.0 && c.is_finite() && (0.0..1.0).contains(&rho),
            DecayClass::PowerLaw { c, alpha } => c >= 0.0 && c.is_finite() && alpha > 0.0 && alpha.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::usage(format!("invalid decay class {self:?}")))
        }
    }
}

type CoeffFn = Arc<dyn Fn(u64) -> Scalar + Send + Sync>;

#[derive(Clone)]
enum Coefficients {
    Explicit(Arc<Vec<Scalar>>),
    Lazy(CoeffFn),
}

/// `f(z) = Σ a_k z^k` with a declared coefficient decay.
#[derive(Clone)]
pub struct TaylorFunction {
    coeffs: Coefficients,
    decay: DecayClass,
    space: BhfdSpace,
    label: String,
}

impl fmt::Debug for TaylorFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TaylorFunction")
            .field("label", &self.label)
            .field("decay", &self.decay)
            .field("space", &self.space)
            .finish()
    }
}

/// Indices at which declared decay classes are spot-checked.
fn spot_indices() -> impl Iterator<Item = u64> {
    (0..64).chain((6..=16).map(|j| 1u64 << j))
}

impl TaylorFunction {
    /// A polynomial with the given coefficients.
    pub fn polynomial(coeffs: Vec<Scalar>, space: BhfdSpace) -> Result<Self> {
        if !coeffs.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite("Taylor coefficients"));
        }
        let degree = coeffs.len().saturating_sub(1) as u64;
        Ok(TaylorFunction {
            coeffs: Coefficients::Explicit(Arc::new(coeffs)),
            decay: DecayClass::FinitelySupported { degree },
            space,
            label: "polynomial".into(),
        })
    }

    /// `a_k = c ρ^k`.
    pub fn geometric(c: Scalar, rho: f64, space: BhfdSpace) -> Result<Self> {
        let decay = DecayClass::Geometric { c: c.norm(), rho };
        decay.validate()?;
        Ok(TaylorFunction {
            coeffs: Coefficients::Lazy(Arc::new(move |k| c * rho.powf(k as f64))),
            decay,
            space,
            label: format!("geometric({rho})"),
        })
    }

    /// `a_k = c (k+1)^{−α}`.
    pub fn power(c: Scalar, alpha: f64, space: BhfdSpace) -> Result<Self> {
        let decay = DecayClass::PowerLaw { c: c.norm(), alpha };
        decay.validate()?;
        Ok(TaylorFunction {
            coeffs: Coefficients::Lazy(Arc::new(move |k| c * (k as f64 + 1.0).powf(-alpha))),
            decay,
            space,
            label: format!("power({alpha})"),
        })
    }

    /// `z^k`.
    pub fn monomial(k: u64, space: BhfdSpace) -> Self {
        let mut c = vec![Scalar::new(0.0, 0.0); k as usize + 1];
        c[k as usize] = Scalar::new(1.0, 0.0);
        let mut f = Self::polynomial(c, space).expect("finite");
        f.label = format!("z^{k}");
        f
    }

    /// Coefficients given by a closure, with a declared decay class that is
    /// spot-checked at a fixed set of indices.
    pub fn lazy<F>(coeff: F, decay: DecayClass, space: BhfdSpace) -> Result<Self>
    where
        F: Fn(u64) -> Scalar + Send + Sync + 'static,
    {
        decay.validate()?;
        for k in spot_indices() {
            let a = coeff(k).norm();
            if !a.is_finite() || a > decay.bound(k) * (1.0 + 1e-9) {
                return Err(Error::usage(format!(
                    "coefficient {k} has modulus {a}, above the declared bound {}",
                    decay.bound(k)
                )));
            }
        }
        Ok(TaylorFunction {
            coeffs: Coefficients::Lazy(Arc::new(coeff)),
            decay,
            space,
            label: "lazy".into(),
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_space(mut self, space: BhfdSpace) -> Self {
        self.space = space;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn space(&self) -> BhfdSpace {
        self.space
    }

    pub fn decay(&self) -> DecayClass {
        self.decay
    }

    pub fn coeff(&self, k: u64) -> Scalar {
        match &self.coeffs {
            Coefficients::Explicit(v) => v.get(k as usize).copied().unwrap_or_default(),
            Coefficients::Lazy(f) => f(k),
        }
    }

    /// `a_0, …, a_n`.
    pub fn coeffs_upto(&self, n: u64) -> Vec<Scalar> {
        (0..=n).map(|k| self.coeff(k)).collect()
    }

    /// Degree of a finitely supported function.
    pub fn degree(&self) -> Option<u64> {
        match self.decay {
            DecayClass::FinitelySupported { degree } => Some(degree),
            _ => None,
        }
    }

    /// Smallest `n` whose tail beyond `n` has norm at most `trunc.tail_tol`
    /// in this function's space, with that tail bound.
    pub fn truncation(&self, trunc: &TruncationPolicy) -> Result<(u64, f64)> {
        if let Some(d) = self.degree() {
            return Ok((d, 0.0));
        }
        let tail = |n: u64| {
            let (l2, l1) = self.decay.tail_bounds(n);
            self.space.tail_norm(l2, l1)
        };
        let alpha = match self.decay {
            DecayClass::PowerLaw { alpha, .. } => alpha,
            _ => f64::NAN,
        };
        if !tail(0).is_finite() {
            return Err(Error::NonSummable {
                param: alpha,
                terms: 0,
                bound: f64::INFINITY,
            });
        }
        // Exponential search, then bisection, on the monotone tail bound.
        let mut hi = 1u64;
        while tail(hi) > trunc.tail_tol {
            if hi > trunc.max_terms {
                return Err(Error::NonSummable {
                    param: alpha,
                    terms: trunc.max_terms,
                    bound: tail(trunc.max_terms),
                });
            }
            hi *= 2;
        }
        let mut lo = hi / 2;
        while lo + 1 < hi {
            let mid = lo + (hi - lo) / 2;
            if tail(mid) <= trunc.tail_tol {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let n = if tail(lo) <= trunc.tail_tol { lo } else { hi };
        Ok((n, tail(n)))
    }
}

/// `S_n(f) = Σ_{k≤n} a_k z^k`.
pub fn partial_sum(f: &TaylorFunction, n: u64) -> TaylorFunction {
    let keep = match f.degree() {
        Some(d) => n.min(d),
        None => n,
    };
    let mut g = TaylorFunction::polynomial(f.coeffs_upto(keep), f.space).expect("coefficients are finite");
    g.label = format!("S_{n}({})", f.label);
    g
}

/// Coefficients `0..=k_max` of `(1 − r) Σ_m r^m S_m(f)`, summed literally.
///
/// The sum over `m` stops at the first `M` with `r^{M+1} ≤ tail_tol / 2`;
/// for `m > k_max` every tracked coefficient gets the same weight, so those
/// weights are accumulated once and applied at the end.
pub fn abel_dilate_double_sum(f: &TaylorFunction, r: f64, k_max: u64, trunc: &TruncationPolicy) -> Result<Vec<Scalar>> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::usage(format!("dilation parameter must lie in [0, 1), got {r}")));
    }
    let a = f.coeffs_upto(k_max);
    let k_max = k_max as usize;
    let big_m = if r == 0.0 {
        0
    } else {
        ((trunc.tail_tol / 2.0).ln() / r.ln()).ceil().max(0.0) as u64
    };
    if big_m > trunc.max_terms {
        return Err(Error::BudgetExceeded {
            needed: big_m,
            max_terms: trunc.max_terms,
        });
    }
    let weight = |m: u64| (1.0 - r) * r.powi(m as i32);
    let mut re = vec![Neumaier::default(); k_max + 1];
    let mut im = vec![Neumaier::default(); k_max + 1];
    for m in 0..=big_m.min(k_max as u64) {
        let w = weight(m);
        // S_m(f) contributes a_k for k ≤ m.
        for k in 0..=(m as usize) {
            re[k].add(w * a[k].re);
            im[k].add(w * a[k].im);
        }
    }
    if big_m > k_max as u64 {
        let mut tail = Neumaier::default();
        for m in (k_max as u64 + 1)..=big_m {
            tail.add(weight(m));
        }
        let w = tail.total();
        for k in 0..=k_max {
            re[k].add(w * a[k].re);
            im[k].add(w * a[k].im);
        }
    }
    Ok((0..=k_max).map(|k| Scalar::new(re[k].total(), im[k].total())).collect())
}

#[derive(Default, Clone, Copy)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `A_r(f)`: coefficients `a_k r^k`.
///
/// The multiplier form is cross-checked against the literal double sum on
/// the coefficients that carry the function up to `trunc.tail_tol`; a
/// mismatch is reported as a consistency error.
pub fn abel_dilate(f: &TaylorFunction, r: f64, trunc: &TruncationPolicy) -> Result<TaylorFunction> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::usage(format!("dilation parameter must lie in [0, 1), got {r}")));
    }
    let (k_max, _) = f.truncation(trunc)?;
    let literal = abel_dilate_double_sum(f, r, k_max, trunc)?;
    for (k, d) in literal.iter().enumerate() {
        let a = f.coeff(k as u64);
        let m = a * r.powi(k as i32);
        if (m - d).norm() > trunc.tail_tol * (1.0 + a.norm()) {
            return Err(Error::Consistency(format!(
                "dilate coefficient {k} at r = {r}: multiplier {m} vs double sum {d}"
            )));
        }
    }
    let g = dilate_lazy(f, r);
    Ok(g)
}

fn dilate_lazy(f: &TaylorFunction, r: f64) -> TaylorFunction {
    let label = format!("A_{r}({})", f.label);
    match (&f.coeffs, f.decay) {
        (Coefficients::Explicit(c), _) => {
            let c: Vec<Scalar> = c.iter().enumerate().map(|(k, a)| a * r.powi(k as i32)).collect();
            TaylorFunction::polynomial(c, f.space).expect("finite").with_label(label)
        }
        (Coefficients::Lazy(inner), decay) => {
            let inner = inner.clone();
            let decay = match decay {
                DecayClass::Geometric { c, rho } => DecayClass::Geometric { c, rho: rho * r },
                other => other,
            };
            TaylorFunction {
                coeffs: Coefficients::Lazy(Arc::new(move |k| inner(k) * r.powf(k as f64))),
                decay,
                space: f.space,
                label,
            }
        }
    }
}

/// `λ_0(r), …, λ_n(r)` with `λ_k(r) = −(1/log(1−r)) ∫_0^r t^k/(1−t) dt`.
///
/// All multipliers come from one vector-valued quadrature in
/// `u = −log(1−t)`, where the integrand becomes `t^k`. `λ_0 = 1` exactly.
pub fn log_multipliers(r: f64, n: u64, quad: &QuadratureConfig) -> Result<Vec<f64>> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::usage(format!("logarithmic mean needs 0 < r < 1, got {r}")));
    }
    let log = (-r).ln_1p();
    let space = Space::new(n as usize + 1, NormKind::Sup)?;
    let cfg = QuadratureConfig {
        tol: quad.tol * log.abs(),
        substitution: Substitution::LogBoundary,
        ..*quad
    };
    let res = adaptive_quadrature(
        space,
        |t, out| {
            let inv = 1.0 / (1.0 - t);
            let mut p = 1.0;
            for z in out.iter_mut() {
                *z = Scalar::new(p * inv, 0.0);
                p *= t;
            }
        },
        0.0,
        r,
        &cfg,
    )?;
    let mut lambda: Vec<f64> = res.value.coords().iter().map(|z| -z.re / log).collect();
    lambda[0] = 1.0;
    Ok(lambda)
}

/// `L_r(f)`, truncated where `f` is (the discarded tail has norm at most
/// `trunc.tail_tol` since `0 ≤ λ_k ≤ 1`).
pub fn log_taylor_mean(f: &TaylorFunction, r: f64, quad: &QuadratureConfig, trunc: &TruncationPolicy) -> Result<TaylorFunction> {
    let (k_max, _) = f.truncation(trunc)?;
    let lambda = log_multipliers(r, k_max, quad)?;
    let c = f.coeffs_upto(k_max).iter().zip(&lambda).map(|(a, l)| a * l).collect();
    Ok(TaylorFunction::polynomial(c, f.space)?.with_label(format!("L_{r}({})", f.label)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormValue {
    pub value: f64,
    /// Bound on the contribution of the coefficients that were not summed.
    pub tail_bound: f64,
    pub terms: u64,
}

/// `‖f‖` in the function's space, with a certified tail.
pub fn bhfd_norm(f: &TaylorFunction, trunc: &TruncationPolicy) -> Result<NormValue> {
    let (n, tail) = f.truncation(trunc)?;
    Ok(NormValue {
        value: f.space.norm_of(&f.coeffs_upto(n)),
        tail_bound: tail,
        terms: n + 1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainStep {
    PartialSums,
    AbelDilate,
    LogMean,
}

impl ChainStep {
    fn domain(self) -> IndexDomain {
        match self {
            ChainStep::PartialSums => IndexDomain::DiscreteNat,
            ChainStep::AbelDilate | ChainStep::LogMean => IndexDomain::unit_interval(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaylorReport {
    pub function: String,
    pub space: String,
    pub chain: Vec<ChainStep>,
    pub grid: Vec<f64>,
    /// `‖M_p(f) − f‖` per grid point (`None` where evaluation failed).
    pub distances: Vec<Option<f64>>,
    pub errors: Vec<Option<String>>,
    pub estimate: ConvergenceEstimate,
    /// Converged with a limit within `tol` of 0.
    pub converged_to_zero: bool,
}

/// Coefficient multipliers `μ_0..μ_n` of the chain at parameter `p`.
fn chain_multipliers(chain: &[ChainStep], p: f64, n: u64, quad: &QuadratureConfig) -> Result<Vec<f64>> {
    let mut mu = vec![1.0; n as usize + 1];
    for step in chain {
        match step {
            ChainStep::PartialSums => {
                for (k, m) in mu.iter_mut().enumerate() {
                    if k as f64 > p {
                        *m = 0.0;
                    }
                }
            }
            ChainStep::AbelDilate => {
                for (k, m) in mu.iter_mut().enumerate() {
                    *m *= p.powi(k as i32);
                }
            }
            ChainStep::LogMean => {
                let l = log_multipliers(p, n, quad)?;
                for (m, l) in mu.iter_mut().zip(l) {
                    *m *= l;
                }
            }
        }
    }
    Ok(mu)
}

/// `‖M_p(f) − f‖` along `parameter_grid(F, depth)` for the composed chain,
/// then the limit estimator on those distances.
///
/// Every multiplier lies in `[0, 1]`, so the coefficients beyond the
/// truncation contribute at most the certified tail of `f`.
pub fn taylor_summability_experiment(
    f: &TaylorFunction,
    chain: &[ChainStep],
    depth: u32,
    limit: &LimitConfig,
    quad: &QuadratureConfig,
    trunc: &TruncationPolicy,
) -> Result<TaylorReport> {
    let Some(first) = chain.first() else {
        return Err(Error::usage("method chain must not be empty"));
    };
    let domain = first.domain();
    if chain.iter().any(|s| s.domain() != domain) {
        return Err(Error::usage("chain mixes steps indexed by ℕ and by [0, 1)"));
    }
    limit.validate()?;
    let (n, tail) = f.truncation(trunc)?;
    let coeffs = f.coeffs_upto(n);
    let grid = parameter_grid(domain, depth)?;
    let results: Vec<Result<f64>> = grid
        .par_iter()
        .map(|&p| {
            let mu = chain_multipliers(chain, p, n, quad)?;
            let diff: Vec<Scalar> = coeffs.iter().zip(&mu).map(|(a, m)| a * (m - 1.0)).collect();
            Ok(f.space.norm_of(&diff) + tail)
        })
        .collect();
    let samples: Vec<Option<Vector>> = results
        .iter()
        .map(|r| r.as_ref().ok().map(|d| Vector::scalar(Scalar::new(*d, 0.0))))
        .collect();
    let refs: Vec<Option<&Vector>> = samples.iter().map(Option::as_ref).collect();
    let estimate = crate::domains::estimate_partial(&refs, limit)?;
    let converged_to_zero = estimate.status == Status::Converged
        && estimate.value.as_ref().is_some_and(|v| v.norm() <= limit.tol);
    Ok(TaylorReport {
        function: f.label.clone(),
        space: f.space.label(),
        chain: chain.to_vec(),
        grid,
        distances: results.iter().map(|r| r.as_ref().ok().copied()).collect(),
        errors: results.iter().map(|r| r.as_ref().err().map(|e| e.to_string())).collect(),
        estimate,
        converged_to_zero,
    })
}

/// `‖S_n f − f‖` for `n = 0..=n_max`, each with the certified tail of `f`.
pub fn partial_sum_distances(f: &TaylorFunction, n_max: u64, trunc: &TruncationPolicy) -> Result<Vec<f64>> {
    let (n, tail) = f.truncation(trunc)?;
    let coeffs = f.coeffs_upto(n.max(n_max));
    Ok((0..=n_max)
        .map(|m| {
            let rest: Vec<Scalar> = coeffs.iter().skip(m as usize + 1).copied().collect();
            f.space.norm_of(&rest) + if m >= n { 0.0 } else { tail }
        })
        .collect())
}

/// Limit estimate of a plain sequence of distances (convenience for
/// reports).
pub fn estimate_distances(distances: &[f64], limit: &LimitConfig) -> Result<ConvergenceEstimate> {
    let v: Vec<Vector> = distances.iter().map(|d| Vector::scalar(Scalar::new(*d, 0.0))).collect();
    estimate_limit_at_infinity(&v, limit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Scalar {
        Scalar::new(x, 0.0)
    }

    #[test]
    fn partial_sum_examples() {
        let p = TaylorFunction::polynomial(vec![c(1.0), c(2.0), c(3.0), c(4.0)], BhfdSpace::H2).unwrap();
        assert_eq!(partial_sum(&p, 5).coeffs_upto(3), p.coeffs_upto(3));
        let g = TaylorFunction::geometric(c(1.0), 0.5, BhfdSpace::H2).unwrap();
        assert_eq!(partial_sum(&g, 1).coeffs_upto(2), vec![c(1.0), c(0.5), c(0.0)]);
        assert_eq!(partial_sum(&g, 0).degree(), Some(0));
    }

    #[test]
    fn dilate_examples() {
        let t = TruncationPolicy::default();
        let p = TaylorFunction::polynomial(vec![c(3.0), c(-1.0), c(2.0)], BhfdSpace::H2).unwrap();
        assert_eq!(abel_dilate(&p, 0.0, &t).unwrap().coeffs_upto(2), vec![c(3.0), c(0.0), c(0.0)]);
        let ones = TaylorFunction::polynomial(vec![c(1.0); 3], BhfdSpace::H2).unwrap();
        assert_eq!(abel_dilate(&ones, 0.5, &t).unwrap().coeffs_upto(2), vec![c(1.0), c(0.5), c(0.25)]);
        let z5 = TaylorFunction::monomial(5, BhfdSpace::H2);
        let n = bhfd_norm(&abel_dilate(&z5, 0.9, &t).unwrap(), &t).unwrap();
        assert!((n.value - 0.9f64.powi(5)).abs() < 1e-15);
    }

    #[test]
    fn multiplier_examples() {
        let q = QuadratureConfig::default();
        let r = 1.0 - (-1f64).exp();
        let l = log_multipliers(r, 1, &q).unwrap();
        assert_eq!(l[0], 1.0);
        assert!((l[1] - (-1f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn norm_examples() {
        let t = TruncationPolicy::default();
        assert_eq!(bhfd_norm(&TaylorFunction::monomial(7, BhfdSpace::H2), &t).unwrap().value, 1.0);
        let g = TaylorFunction::geometric(c(1.0), 0.5, BhfdSpace::H2).unwrap();
        assert!((bhfd_norm(&g, &t).unwrap().value - (4.0f64 / 3.0).sqrt()).abs() < 1e-14);
        let w = g.clone().with_space(BhfdSpace::Wiener);
        assert!((bhfd_norm(&w, &t).unwrap().value - 2.0).abs() < 1e-13);
        let d = g.with_space(BhfdSpace::disk_grid());
        assert!((bhfd_norm(&d, &t).unwrap().value - 2.0).abs() < 1e-13);
        let slow = TaylorFunction::power(c(1.0), 0.8, BhfdSpace::Wiener).unwrap();
        assert!(matches!(bhfd_norm(&slow, &t), Err(Error::NonSummable { .. })));
    }

    #[test]
    fn lazy_decay_is_spot_checked() {
        assert!(TaylorFunction::lazy(|k| c(0.5f64.powi(k as i32)), DecayClass::Geometric { c: 1.0, rho: 0.5 }, BhfdSpace::H2).is_ok());
        assert!(TaylorFunction::lazy(|_| c(1.0), DecayClass::Geometric { c: 1.0, rho: 0.5 }, BhfdSpace::H2).is_err());
    }

    #[test]
    fn polynomial_chain_converges() {
        let p = TaylorFunction::polynomial(vec![c(1.0), c(-2.0), c(0.5)], BhfdSpace::Wiener).unwrap();
        let lim = LimitConfig::new(4, 1e-4).unwrap();
        let rep = taylor_summability_experiment(&p, &[ChainStep::AbelDilate], 20, &lim, &QuadratureConfig::default(), &TruncationPolicy::default()).unwrap();
        assert!(rep.converged_to_zero);
        let rep = taylor_summability_experiment(&p, &[ChainStep::PartialSums], 6, &lim, &QuadratureConfig::default(), &TruncationPolicy::default()).unwrap();
        assert!(rep.converged_to_zero);
    }
}
