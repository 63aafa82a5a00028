//! Index and parameter domains, their compact exhaustions, and the
//! limit-at-infinity estimator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vspace::Vector;

/// Either `ℕ` or a half-open interval `[0, R)` with `0 < R ≤ ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IndexDomain {
    DiscreteNat,
    HalfOpen { right: f64 },
}

impl IndexDomain {
    pub fn unit_interval() -> Self {
        IndexDomain::HalfOpen { right: 1.0 }
    }

    pub fn half_line() -> Self {
        IndexDomain::HalfOpen {
            right: f64::INFINITY,
        }
    }

    pub fn half_open(right: f64) -> Result<Self> {
        if right.is_nan() || right <= 0.0 {
            return Err(Error::usage(format!(
                "interval right end must be positive, got {right}"
            )));
        }
        Ok(IndexDomain::HalfOpen { right })
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, IndexDomain::DiscreteNat)
    }

    pub fn contains(&self, t: f64) -> bool {
        match *self {
            IndexDomain::DiscreteNat => t >= 0.0 && t.fract() == 0.0,
            IndexDomain::HalfOpen { right } => (0.0..right).contains(&t),
        }
    }

    /// A monotone map of the domain onto `[1, ∞)`-ish magnitudes, used when
    /// fitting power-law trends against grid points.
    pub fn scale(&self, p: f64) -> f64 {
        match *self {
            IndexDomain::DiscreteNat => p.max(1.0),
            IndexDomain::HalfOpen { right } if right.is_infinite() => p.max(1.0),
            IndexDomain::HalfOpen { right } => 1.0 / (1.0 - p / right),
        }
    }
}

/// The compact set `K_n` of an exhaustion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CompactWindow {
    /// `{0, …, n}`.
    Discrete { n: u64 },
    /// `[0, hi]`.
    Interval { hi: f64 },
}

impl CompactWindow {
    pub fn contains(&self, t: f64) -> bool {
        match *self {
            CompactWindow::Discrete { n } => t >= 0.0 && t.fract() == 0.0 && t <= n as f64,
            CompactWindow::Interval { hi } => (0.0..=hi).contains(&t),
        }
    }

    pub fn upper(&self) -> f64 {
        match *self {
            CompactWindow::Discrete { n } => n as f64,
            CompactWindow::Interval { hi } => hi,
        }
    }
}

pub fn exhaustion(domain: IndexDomain, n: u32) -> CompactWindow {
    match domain {
        IndexDomain::DiscreteNat => CompactWindow::Discrete { n: u64::from(n) },
        IndexDomain::HalfOpen { right } if right.is_infinite() => CompactWindow::Interval {
            hi: 2f64.powi(n as i32),
        },
        IndexDomain::HalfOpen { right } => CompactWindow::Interval {
            hi: right * (1.0 - 2f64.powi(-(n as i32) - 1)),
        },
    }
}

/// Grid points `p_1, …, p_depth` approaching the point at infinity of the
/// domain: `2^k` on `ℕ` and `[0, ∞)`, `R(1 − 2^{−k})` on `[0, R)`.
pub fn parameter_grid(domain: IndexDomain, depth: u32) -> Result<Vec<f64>> {
    if depth == 0 {
        return Err(Error::usage("grid depth must be at least 1"));
    }
    let grid = (1..=depth as i32)
        .map(|k| match domain {
            IndexDomain::HalfOpen { right } if right.is_finite() => right * (1.0 - 2f64.powi(-k)),
            _ => 2f64.powi(k),
        })
        .collect();
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    Diverged,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitConfig {
    pub window: usize,
    pub tol: f64,
}

impl Default for LimitConfig {
    fn default() -> Self {
        LimitConfig {
            window: 4,
            tol: 1e-6,
        }
    }
}

impl LimitConfig {
    pub fn new(window: usize, tol: f64) -> Result<Self> {
        let cfg = LimitConfig { window, tol };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::usage("estimator window must be at least 1"));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::usage(format!("tolerance must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceEstimate {
    pub status: Status,
    /// Present iff `status` is `Converged`.
    pub value: Option<Vector>,
    /// Pairwise diameter of the final window (infinite if the window had
    /// undefined points).
    pub residual: f64,
    pub samples_used: usize,
    /// Grid points at which the input was undefined.
    pub undefined: usize,
    /// Norm of the last defined sample.
    pub last_norm: f64,
}

impl ConvergenceEstimate {
    pub fn is_converged(&self) -> bool {
        self.status == Status::Converged
    }

    pub(crate) fn all_undefined(count: usize) -> Self {
        ConvergenceEstimate {
            status: Status::Inconclusive,
            value: None,
            residual: f64::INFINITY,
            samples_used: 0,
            undefined: count,
            last_norm: f64::NAN,
        }
    }
}

/// Decides convergence of a sampled family ordered toward infinity.
///
/// Converged when the final `window` samples have pairwise diameter at most
/// `tol`; the reported value is the last sample. Diverged when, over the
/// final window, the norms increase strictly, by more than `2·tol`, end above
/// ten times the norm of the first sample, and (with enough history) the
/// growth is not decelerating by more than half relative to the previous
/// window. Anything else is Inconclusive.
pub fn estimate_limit_at_infinity(samples: &[Vector], cfg: &LimitConfig) -> Result<ConvergenceEstimate> {
    let wrapped: Vec<Option<&Vector>> = samples.iter().map(Some).collect();
    estimate_partial(&wrapped, cfg)
}

/// As [`estimate_limit_at_infinity`], with `None` marking grid points where
/// the input was undefined. Undefined points inside the final window make
/// the estimate Inconclusive.
pub fn estimate_partial(samples: &[Option<&Vector>], cfg: &LimitConfig) -> Result<ConvergenceEstimate> {
    cfg.validate()?;
    if samples.is_empty() {
        return Err(Error::usage("limit estimator needs at least one sample"));
    }
    let undefined = samples.iter().filter(|s| s.is_none()).count();
    let defined: Vec<&Vector> = samples.iter().flatten().copied().collect();
    if defined.is_empty() {
        return Ok(ConvergenceEstimate::all_undefined(undefined));
    }
    let dim = defined[0].dim();
    if let Some(bad) = defined.iter().find(|v| v.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.dim(),
        });
    }

    let w = cfg.window.min(samples.len());
    let n = samples.len();
    let last_norm = defined.last().map(|v| v.norm()).unwrap_or(f64::NAN);
    let tail = &samples[n - w..];
    if tail.iter().any(Option::is_none) {
        return Ok(ConvergenceEstimate {
            status: Status::Inconclusive,
            value: None,
            residual: f64::INFINITY,
            samples_used: defined.len(),
            undefined,
            last_norm,
        });
    }
    let tail: Vec<&Vector> = tail.iter().flatten().copied().collect();

    let mut diameter = 0.0f64;
    for (i, a) in tail.iter().enumerate() {
        for b in &tail[i + 1..] {
            diameter = diameter.max(a.distance(b));
        }
    }

    let mut estimate = ConvergenceEstimate {
        status: Status::Inconclusive,
        value: None,
        residual: diameter,
        samples_used: defined.len(),
        undefined,
        last_norm,
    };
    if diameter <= cfg.tol {
        estimate.status = Status::Converged;
        estimate.value = Some((*tail[w - 1]).clone());
    } else if w >= 2 && is_diverging(samples, w, cfg.tol) {
        estimate.status = Status::Diverged;
    }
    Ok(estimate)
}

fn is_diverging(samples: &[Option<&Vector>], w: usize, tol: f64) -> bool {
    let n = samples.len();
    let norms: Vec<f64> = samples[n - w..]
        .iter()
        .map(|s| s.expect("checked defined").norm())
        .collect();
    if !norms.windows(2).all(|p| p[1] > p[0]) {
        return false;
    }
    let growth = norms[w - 1] - norms[0];
    if growth <= 2.0 * tol {
        return false;
    }
    let first = samples.iter().flatten().next().map(|v| v.norm()).unwrap_or(0.0);
    let scale = if first > 0.0 { first } else { 1.0 };
    if norms[w - 1] <= 10.0 * scale {
        return false;
    }
    if n >= 2 * w {
        let prev = &samples[n - 2 * w..n - w];
        match (prev[0], prev[w - 1]) {
            (Some(a), Some(b)) => {
                let prev_growth = b.norm() - a.norm();
                if growth < 0.5 * prev_growth {
                    return false;
                }
            }
            _ => return false,
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vspace::{Scalar, Space};

    fn s(x: f64) -> Vector {
        Vector::scalar(Scalar::new(x, 0.0))
    }

    #[test]
    fn exhaustion_examples() {
        assert_eq!(exhaustion(IndexDomain::DiscreteNat, 3), CompactWindow::Discrete { n: 3 });
        assert_eq!(exhaustion(IndexDomain::unit_interval(), 0), CompactWindow::Interval { hi: 0.5 });
        assert_eq!(exhaustion(IndexDomain::half_line(), 4), CompactWindow::Interval { hi: 16.0 });
    }

    #[test]
    fn grid_examples() {
        let d = IndexDomain::unit_interval();
        assert_eq!(parameter_grid(d, 3).unwrap(), vec![0.5, 0.75, 0.875]);
        assert_eq!(parameter_grid(d, 1).unwrap(), vec![0.5]);
        assert_eq!(parameter_grid(IndexDomain::DiscreteNat, 2).unwrap(), vec![2.0, 4.0]);
        assert!(parameter_grid(d, 0).is_err());
    }

    #[test]
    fn constant_samples_converge() {
        let c = Vector::new(Space::new(2, crate::NormKind::L2).unwrap(), vec![Scalar::new(1.0, -2.0); 2]).unwrap();
        let est = estimate_limit_at_infinity(&vec![c.clone(); 6], &LimitConfig::new(4, 1e-300).unwrap()).unwrap();
        assert_eq!(est.status, Status::Converged);
        assert_eq!(est.value, Some(c));
        assert_eq!(est.residual, 0.0);
    }

    #[test]
    fn alternating_samples_inconclusive() {
        let xs: Vec<_> = (0..12).map(|n| s(if n % 2 == 0 { 1.0 } else { -1.0 })).collect();
        let est = estimate_limit_at_infinity(&xs, &LimitConfig::default()).unwrap();
        assert_eq!(est.status, Status::Inconclusive);
        assert_eq!(est.residual, 2.0);
    }

    #[test]
    fn linear_growth_diverges() {
        let xs: Vec<_> = (1..=14).map(|k| s(2f64.powi(k) + 1.0)).collect();
        let est = estimate_limit_at_infinity(&xs, &LimitConfig::default()).unwrap();
        assert_eq!(est.status, Status::Diverged);
    }

    #[test]
    fn saturating_growth_is_not_divergence() {
        let xs: Vec<_> = (1..=14).map(|k| s(100.0 * (1.0 - 0.5f64.powi(k)))).collect();
        let est = estimate_limit_at_infinity(&xs, &LimitConfig::new(4, 1e-9).unwrap()).unwrap();
        assert_eq!(est.status, Status::Inconclusive);
    }

    #[test]
    fn empty_is_usage_error() {
        assert!(matches!(
            estimate_limit_at_infinity(&[], &LimitConfig::default()),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn undefined_tail_is_inconclusive() {
        let one = s(1.0);
        let xs = vec![Some(&one), Some(&one), Some(&one), None];
        let est = estimate_partial(&xs, &LimitConfig::new(2, 1e-6).unwrap()).unwrap();
        assert_eq!(est.status, Status::Inconclusive);
        assert_eq!(est.undefined, 1);
        let xs = vec![None, Some(&one), Some(&one), Some(&one)];
        let est = estimate_partial(&xs, &LimitConfig::new(2, 1e-6).unwrap()).unwrap();
        assert_eq!(est.status, Status::Converged);
    }
}
