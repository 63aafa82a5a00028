//! Vector-valued integration: step-function integrals, globally adaptive
//! Gauss–Kronrod quadrature, and checks of the weak-integral and
//! operator-commutation properties.
//!
//! The base rule is the 7-point Gauss / 15-point Kronrod pair. The Kronrod
//! rule integrates polynomials of degree ≤ 22 exactly; the Gauss rule
//! degree ≤ 13. The error estimate on a subinterval is `‖K15 − G7‖` in the
//! norm of the value space.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vspace::{LinearFunctional, Operator, Scalar, Space, Vector};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const MAX_INTERVALS: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Substitution {
    #[default]
    None,
    /// Integrate in `u = −log(1 − t)`; `dt = (1 − t) du`. Tames integrands
    /// with a `1/(1 − t)` singularity as the upper limit approaches 1.
    LogBoundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub tol: f64,
    pub max_depth: u32,
    pub substitution: Substitution,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            tol: 1e-10,
            max_depth: 50,
            substitution: Substitution::None,
        }
    }
}

impl QuadratureConfig {
    pub fn with_tol(tol: f64) -> Self {
        QuadratureConfig {
            tol,
            ..Self::default()
        }
    }

    pub fn log_boundary(tol: f64) -> Self {
        QuadratureConfig {
            tol,
            substitution: Substitution::LogBoundary,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::usage(format!("quadrature tol must be positive, got {}", self.tol)));
        }
        if self.max_depth == 0 {
            return Err(Error::usage("quadrature max_depth must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: Vector,
    pub err_estimate: f64,
    pub evaluations: u64,
}

struct Panel {
    a: f64,
    b: f64,
    depth: u32,
    value: Vec<Scalar>,
    err: f64,
    /// Error already at rounding level; refining cannot improve it.
    settled: bool,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // Unsettled panels first, then by error, then leftmost for determinism.
        (!self.settled)
            .cmp(&!other.settled)
            .then(self.err.total_cmp(&other.err))
            .then(other.a.total_cmp(&self.a))
    }
}

struct Rule<'f, F> {
    f: &'f F,
    space: Space,
    fv: Vec<Scalar>,
    kron: Vec<Scalar>,
    gauss: Vec<Scalar>,
    evaluations: u64,
}

impl<F: Fn(f64, &mut [Scalar])> Rule<'_, F> {
    fn panel(&mut self, a: f64, b: f64, depth: u32) -> Panel {
        let centre = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let zero = Scalar::new(0.0, 0.0);
        self.kron.fill(zero);
        self.gauss.fill(zero);
        let mut resabs = 0.0;
        for j in 0..8 {
            let nodes: &[f64] = if j == 7 {
                &[centre]
            } else {
                &[centre - half * XGK[j], centre + half * XGK[j]]
            };
            for &t in nodes {
                (self.f)(t, &mut self.fv);
                self.evaluations += 1;
                for (i, y) in self.fv.iter().enumerate() {
                    self.kron[i] += WGK[j] * y;
                    if j % 2 == 1 {
                        self.gauss[i] += WG[j / 2] * y;
                    }
                }
                resabs += WGK[j] * self.fv.iter().map(|z| z.norm()).sum::<f64>();
            }
        }
        let value: Vec<Scalar> = self.kron.iter().map(|k| k * half).collect();
        let diff: Vec<Scalar> = self
            .kron
            .iter()
            .zip(&self.gauss)
            .map(|(k, g)| (k - g) * half)
            .collect();
        let err = self.space.norm_kind().eval(&diff);
        let floor = 50.0 * f64::EPSILON * resabs * half.abs();
        let finite = value.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        Panel {
            a,
            b,
            depth,
            value,
            err: if finite { err } else { f64::INFINITY },
            settled: finite && err <= floor,
        }
    }
}

/// Integrates `f` over `[a, b]` to absolute accuracy `cfg.tol`.
///
/// `f(t, out)` writes the coordinates of `f(t)` into `out`. With
/// [`Substitution::LogBoundary`] the integral is computed in
/// `u = −log(1 − t)` and `f` is still called with `t`; this requires
/// `b ≤ 1`, and `b = 1` only if the transformed integrand decays.
pub fn adaptive_quadrature<F>(space: Space, f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<QuadratureResult>
where
    F: Fn(f64, &mut [Scalar]),
{
    cfg.validate()?;
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::usage(format!("quadrature needs a finite interval a ≤ b, got [{a}, {b}]")));
    }
    match cfg.substitution {
        Substitution::None => integrate_panels(space, &f, a, b, cfg),
        Substitution::LogBoundary => {
            if b >= 1.0 {
                return Err(Error::usage(format!(
                    "log-boundary substitution needs b < 1, got b = {b}"
                )));
            }
            let d = space.dim();
            let g = |u: f64, out: &mut [Scalar]| {
                let t = -(-u).exp_m1();
                f(t, out);
                let jac = 1.0 - t;
                for z in out.iter_mut().take(d) {
                    *z *= jac;
                }
            };
            let ua = -(-a).ln_1p();
            let ub = -(-b).ln_1p();
            integrate_panels(space, &g, ua, ub, cfg)
        }
    }
}

fn integrate_panels<F>(space: Space, f: &F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<QuadratureResult>
where
    F: Fn(f64, &mut [Scalar]),
{
    let d = space.dim();
    let zero = Scalar::new(0.0, 0.0);
    if a == b {
        return Ok(QuadratureResult {
            value: space.zero(),
            err_estimate: 0.0,
            evaluations: 0,
        });
    }
    let mut rule = Rule {
        f,
        space,
        fv: vec![zero; d],
        kron: vec![zero; d],
        gauss: vec![zero; d],
        evaluations: 0,
    };
    let mut heap = BinaryHeap::new();
    let first = rule.panel(a, b, 0);
    let mut total = first.err;
    heap.push(first);

    loop {
        if total <= cfg.tol {
            // Recompute to shed accumulated rounding in the running total.
            total = heap.iter().map(|p| p.err).sum();
            if total <= cfg.tol {
                break;
            }
        }
        let worst = heap.peek().expect("heap never empty");
        if worst.settled || worst.depth >= cfg.max_depth || heap.len() >= MAX_INTERVALS || !worst.err.is_finite() {
            let reason = if !worst.err.is_finite() {
                "non-finite integrand".to_string()
            } else if worst.settled {
                "tolerance below rounding level".to_string()
            } else if worst.depth >= cfg.max_depth {
                format!("max depth {} reached", cfg.max_depth)
            } else {
                format!("more than {MAX_INTERVALS} subintervals")
            };
            return Err(Error::Quadrature {
                a: worst.a,
                b: worst.b,
                err_estimate: heap.iter().map(|p| p.err).sum(),
                reason,
            });
        }
        let worst = heap.pop().expect("peeked");
        let mid = 0.5 * (worst.a + worst.b);
        let left = rule.panel(worst.a, mid, worst.depth + 1);
        let right = rule.panel(mid, worst.b, worst.depth + 1);
        total += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
    }

    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut value = vec![zero; d];
    let mut err = 0.0;
    for p in &panels {
        for (v, x) in value.iter_mut().zip(&p.value) {
            *v += x;
        }
        err += p.err;
    }
    Ok(QuadratureResult {
        value: Vector::new(space, value)?,
        err_estimate: err,
        evaluations: rule.evaluations,
    })
}

/// Scalar convenience wrapper around [`adaptive_quadrature`].
pub fn integrate_scalar<F>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<(Scalar, f64)>
where
    F: Fn(f64) -> Scalar,
{
    let r = adaptive_quadrature(Space::scalar(), |t, out| out[0] = f(t), a, b, cfg)?;
    Ok((r.value.coords()[0], r.err_estimate))
}

/// Support of one step-function piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parts", rename_all = "snake_case")]
pub enum Support {
    /// Finite union of intervals under Lebesgue measure; endpoints inclusive
    /// or not makes no difference to the measure.
    Intervals(Vec<(f64, f64)>),
    /// Finite set of naturals under counting measure.
    Points(Vec<u64>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepPiece {
    pub support: Support,
    pub value: Vector,
}

/// `s = Σ_j x_j χ_{E_j}` with pairwise disjoint `E_j` of finite measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepFunction {
    pieces: Vec<StepPiece>,
}

impl StepFunction {
    pub fn new(pieces: Vec<StepPiece>) -> Result<Self> {
        let Some(first) = pieces.first() else {
            return Err(Error::usage("step function needs at least one piece"));
        };
        let space = first.value.space();
        let mut intervals = Vec::new();
        let mut points = Vec::new();
        for p in &pieces {
            if p.value.space() != space {
                return Err(Error::DimensionMismatch {
                    expected: space.dim(),
                    found: p.value.dim(),
                });
            }
            match &p.support {
                Support::Intervals(iv) => {
                    for &(lo, hi) in iv {
                        if !(lo.is_finite() && hi.is_finite()) {
                            return Err(Error::usage("step-function piece has infinite measure"));
                        }
                        if lo > hi {
                            return Err(Error::usage(format!("empty-reversed interval [{lo}, {hi}]")));
                        }
                        intervals.push((lo, hi));
                    }
                }
                Support::Points(pts) => points.extend_from_slice(pts),
            }
        }
        if !intervals.is_empty() && !points.is_empty() {
            return Err(Error::usage("step function mixes Lebesgue and counting supports"));
        }
        intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
        if intervals.windows(2).any(|w| w[1].0 < w[0].1) {
            return Err(Error::usage("step-function supports overlap"));
        }
        points.sort_unstable();
        if points.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::usage("step-function supports overlap"));
        }
        Ok(StepFunction { pieces })
    }

    pub fn pieces(&self) -> &[StepPiece] {
        &self.pieces
    }

    pub fn space(&self) -> Space {
        self.pieces[0].value.space()
    }
}

/// `Σ_j μ(E_j) x_j`.
///
/// Pieces sharing a value are merged first and touching intervals are
/// coalesced, so splitting a piece into sub-pieces leaves the result
/// unchanged bit for bit.
pub fn step_integral(s: &StepFunction) -> Vector {
    let mut groups: Vec<(&Vector, Vec<(f64, f64)>, u64)> = Vec::new();
    for p in s.pieces() {
        let idx = match groups.iter().position(|(v, _, _)| *v == &p.value) {
            Some(i) => i,
            None => {
                groups.push((&p.value, Vec::new(), 0));
                groups.len() - 1
            }
        };
        match &p.support {
            Support::Intervals(iv) => groups[idx].1.extend_from_slice(iv),
            Support::Points(pts) => groups[idx].2 += pts.len() as u64,
        }
    }
    let mut total = s.space().zero();
    for (value, mut iv, count) in groups {
        iv.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut measure = count as f64;
        let mut current: Option<(f64, f64)> = None;
        for (lo, hi) in iv {
            current = match current {
                Some((a, b)) if lo <= b => Some((a, b.max(hi))),
                Some((a, b)) => {
                    measure += b - a;
                    Some((lo, hi))
                }
                None => Some((lo, hi)),
            };
        }
        if let Some((a, b)) = current {
            measure += b - a;
        }
        total.axpy(Scalar::new(measure, 0.0), value);
    }
    total
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakCheck {
    pub functional: usize,
    pub integral: Scalar,
    pub expected: Scalar,
    pub difference: f64,
    pub pass: bool,
}

/// Compares `φ(candidate)` with `∫ φ∘f` for every functional.
pub fn weak_integral_check<F>(
    f: F,
    space: Space,
    interval: (f64, f64),
    candidate: &Vector,
    functionals: &[LinearFunctional],
    cfg: &QuadratureConfig,
) -> Result<Vec<WeakCheck>>
where
    F: Fn(f64, &mut [Scalar]),
{
    if candidate.space() != space {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: candidate.dim(),
        });
    }
    let mut buf = vec![Scalar::new(0.0, 0.0); space.dim()];
    let buf = std::cell::RefCell::new(&mut buf);
    functionals
        .iter()
        .enumerate()
        .map(|(i, phi)| {
            let expected = phi.apply(candidate)?;
            let (integral, _) = integrate_scalar(
                |t| {
                    let mut b = buf.borrow_mut();
                    f(t, &mut b[..]);
                    phi.apply_coords(&b[..]).expect("dimension checked")
                },
                interval.0,
                interval.1,
                cfg,
            )?;
            let difference = (integral - expected).norm();
            Ok(WeakCheck {
                functional: i,
                integral,
                expected,
                difference,
                pass: difference <= cfg.tol * (1.0 + expected.norm()),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommuteCheck {
    pub lhs: Vector,
    pub rhs: Vector,
    pub difference: f64,
    pub pass: bool,
}

/// Compares `T(∫ f)` with `∫ T∘f`; the image lives in `target`.
pub fn bochner_operator_commute_check<F>(
    t: &Operator,
    f: F,
    space: Space,
    target: Space,
    interval: (f64, f64),
    cfg: &QuadratureConfig,
) -> Result<CommuteCheck>
where
    F: Fn(f64, &mut [Scalar]),
{
    if t.cols() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: t.cols(),
            found: space.dim(),
        });
    }
    target.check_len(t.rows())?;
    let (a, b) = interval;
    let integral = adaptive_quadrature(space, &f, a, b, cfg)?.value;
    let lhs = t.apply(&integral, target)?;
    let mut x = vec![Scalar::new(0.0, 0.0); space.dim()];
    let x = std::cell::RefCell::new(&mut x);
    let rhs = adaptive_quadrature(
        target,
        |s, out| {
            let mut x = x.borrow_mut();
            f(s, &mut x[..]);
            t.apply_into(&x[..], out);
        },
        a,
        b,
        cfg,
    )?
    .value;
    let difference = lhs.distance(&rhs);
    let pass = difference <= cfg.tol * (1.0 + lhs.norm());
    Ok(CommuteCheck {
        lhs,
        rhs,
        difference,
        pass,
    })
}

/// `∫_a^b ‖f(t)‖ dt` in the norm of `space`.
pub fn integral_of_norm<F>(f: F, space: Space, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64>
where
    F: Fn(f64, &mut [Scalar]),
{
    let mut buf = vec![Scalar::new(0.0, 0.0); space.dim()];
    let buf = std::cell::RefCell::new(&mut buf);
    let (v, _) = integrate_scalar(
        |t| {
            let mut b = buf.borrow_mut();
            f(t, &mut b[..]);
            Scalar::new(space.norm_kind().eval(&b[..]), 0.0)
        },
        a,
        b,
        cfg,
    )?;
    Ok(v.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vspace::NormKind;

    fn c(x: f64) -> Scalar {
        Scalar::new(x, 0.0)
    }

    #[test]
    fn constant_is_exact() {
        let (v, err) = integrate_scalar(|_| c(3.5), 0.0, 1.0, &QuadratureConfig::default()).unwrap();
        assert!((v.re - 3.5).abs() <= 4.0 * f64::EPSILON);
        assert!(err <= 1e-15);
    }

    #[test]
    fn linear_moment() {
        let (v, err) = integrate_scalar(c, 0.0, 1.0, &QuadratureConfig::default()).unwrap();
        assert!((v.re - 0.5).abs() < 1e-15);
        assert!(err <= 1e-13);
    }

    #[test]
    fn log_boundary_pole() {
        let cfg = QuadratureConfig::log_boundary(1e-12);
        let (v, _) = integrate_scalar(|t| c(1.0 / (1.0 - t)), 0.0, 0.9, &cfg).unwrap();
        assert!((v.re - 10f64.ln()).abs() < 1e-12);
        let r = 1.0 - 2f64.powi(-40);
        let (v, _) = integrate_scalar(|t| c(1.0 / (1.0 - t)), 0.0, r, &cfg).unwrap();
        assert!((v.re - 40.0 * 2f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn depth_exhaustion_reports_interval() {
        let cfg = QuadratureConfig {
            tol: 1e-12,
            max_depth: 3,
            substitution: Substitution::None,
        };
        let err = integrate_scalar(|t| c(t.abs().sqrt()), -1.0, 1.0, &cfg).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }

    #[test]
    fn step_integral_examples() {
        let sp = Space::new(2, NormKind::L2).unwrap();
        let x = Vector::from_reals(sp, &[0.3, -7.1]).unwrap();
        let piece = |iv: Vec<(f64, f64)>, v: &Vector| StepPiece {
            support: Support::Intervals(iv),
            value: v.clone(),
        };
        let half = StepFunction::new(vec![piece(vec![(0.0, 0.5)], &x)]).unwrap();
        assert_eq!(step_integral(&half), x.scale(c(0.5)));
        let whole = StepFunction::new(vec![piece(vec![(0.0, 1.0)], &x)]).unwrap();
        let split = StepFunction::new(vec![piece(vec![(0.0, 0.3)], &x), piece(vec![(0.3, 1.0)], &x)]).unwrap();
        assert_eq!(step_integral(&whole), step_integral(&split));
        let neg = x.scale(c(-1.0));
        let cancel = StepFunction::new(vec![piece(vec![(0.0, 1.0)], &x), piece(vec![(2.0, 3.0)], &neg)]).unwrap();
        assert_eq!(step_integral(&cancel), sp.zero());
        assert!(StepFunction::new(vec![piece(vec![(0.0, f64::INFINITY)], &x)]).is_err());
        assert!(StepFunction::new(vec![piece(vec![(0.0, 0.6)], &x), piece(vec![(0.5, 1.0)], &x)]).is_err());
    }

    #[test]
    fn weak_check_examples() {
        let sp = Space::new(2, NormKind::L2).unwrap();
        let f = |t: f64, out: &mut [Scalar]| {
            out[0] = c(t);
            out[1] = c(t * t);
        };
        let cfg = QuadratureConfig::with_tol(1e-6);
        let good = Vector::from_reals(sp, &[0.5, 1.0 / 3.0]).unwrap();
        let coords = LinearFunctional::coordinates(2);
        assert!(weak_integral_check(f, sp, (0.0, 1.0), &good, &coords, &cfg)
            .unwrap()
            .iter()
            .all(|w| w.pass));
        let bad = Vector::from_reals(sp, &[0.501, 1.0 / 3.0]).unwrap();
        let res = weak_integral_check(f, sp, (0.0, 1.0), &bad, &coords, &cfg).unwrap();
        assert!(!res[0].pass && res[1].pass);
    }

    #[test]
    fn projection_commutes() {
        let sp = Space::new(2, NormKind::L2).unwrap();
        let p = Operator::new(1, 2, vec![c(1.0), c(0.0)]).unwrap();
        let chk = bochner_operator_commute_check(
            &p,
            |t, out| {
                out[0] = c(t);
                out[1] = c(t.exp());
            },
            sp,
            Space::scalar(),
            (0.0, 1.0),
            &QuadratureConfig::default(),
        )
        .unwrap();
        assert!(chk.pass);
        assert!((chk.lhs.coords()[0].re - 0.5).abs() < 1e-14);
    }
}
