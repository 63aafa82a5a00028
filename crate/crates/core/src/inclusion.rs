//! Inclusion experiments between summability methods.
//!
//! `A ⊆ B` means every `A`-summable input is `B`-summable to the same value.
//! These experiments sample that statement on finite test sets: each test
//! input is summed by both methods and classified.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::domains::{parameter_grid, ConvergenceEstimate, IndexDomain, LimitConfig, Status};
use crate::error::{Error, Result};
use crate::methods::{summability_limit, EvalConfig, KernelMethod, MatrixMethod, Method, SeqToFuncMethod};
use crate::regularity::{check_kernel_st, check_matrix_st, default_m_grid, KernelCheckConfig, Overall};
use crate::source::{FunctionSource, SequenceSource, Source};
use crate::vspace::{rank, LinearFunctional, Operator, Scalar, Space, Vector};

/// Slack added to the combined estimator tolerances before two limits are
/// declared different.
pub const LIMIT_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Consistency {
    Transfers,
    Violates { reason: String },
    /// The input is not `A`-summable, so it says nothing about inclusion.
    Vacuous,
    Inconclusive { reason: String },
}

impl Consistency {
    pub fn label(&self) -> &'static str {
        match self {
            Consistency::Transfers => "transfers",
            Consistency::Violates { .. } => "violates",
            Consistency::Vacuous => "vacuous",
            Consistency::Inconclusive { .. } => "inconclusive",
        }
    }
}

/// The outcome of one method on one input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodOutcome {
    pub estimate: ConvergenceEstimate,
    /// Grid points where the transform could not be evaluated.
    pub failures: usize,
    pub first_error: Option<String>,
}

impl MethodOutcome {
    fn failed(err: &Error) -> Self {
        MethodOutcome {
            estimate: ConvergenceEstimate {
                status: Status::Inconclusive,
                value: None,
                residual: f64::INFINITY,
                samples_used: 0,
                undefined: 0,
                last_norm: f64::NAN,
            },
            failures: 1,
            first_error: Some(err.to_string()),
        }
    }

    fn clean(&self) -> bool {
        self.failures == 0
    }
}

fn run_method(method: &Method, v: &Source, depth: u32, cfg: &EvalConfig) -> MethodOutcome {
    match summability_limit(method, v, depth, cfg) {
        Ok(run) => {
            let first_error = run.values.iter().find_map(|r| r.as_ref().err()).map(|e| e.to_string());
            MethodOutcome {
                failures: run.failures(),
                estimate: run.estimate,
                first_error,
            }
        }
        Err(e) => MethodOutcome::failed(&e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InclusionCase {
    pub label: String,
    pub a: MethodOutcome,
    pub b: Option<MethodOutcome>,
    /// `‖lim_A − lim_B‖` when both converged.
    pub distance: Option<f64>,
    pub consistency: Consistency,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub transfers: usize,
    pub violates: usize,
    pub vacuous: usize,
    pub inconclusive: usize,
}

impl Summary {
    fn of<'a>(items: impl IntoIterator<Item = &'a Consistency>) -> Self {
        let mut s = Summary::default();
        for c in items {
            match c {
                Consistency::Transfers => s.transfers += 1,
                Consistency::Violates { .. } => s.violates += 1,
                Consistency::Vacuous => s.vacuous += 1,
                Consistency::Inconclusive { .. } => s.inconclusive += 1,
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InclusionReport {
    pub a: String,
    pub b: String,
    pub depth: u32,
    pub tol: f64,
    pub cases: Vec<InclusionCase>,
    pub summary: Summary,
}

/// Classifies one input. Violates when `A` converges and `B` either
/// converges elsewhere or, with every grid point evaluated, fails to
/// converge; evaluation failures make the case Inconclusive instead.
fn classify(a_method: &Method, b_method: &Method, v: &Source, depth: u32, cfg: &EvalConfig) -> InclusionCase {
    let a = run_method(a_method, v, depth, cfg);
    let label = v.label().to_string();
    if !a.estimate.is_converged() {
        let consistency = if a.clean() {
            Consistency::Vacuous
        } else {
            Consistency::Inconclusive {
                reason: format!("A undefined at {} grid points", a.failures),
            }
        };
        return InclusionCase {
            label,
            a,
            b: None,
            distance: None,
            consistency,
        };
    }
    let b = run_method(b_method, v, depth, cfg);
    let (distance, consistency) = match (&a.estimate.value, &b.estimate.value) {
        (Some(la), Some(lb)) => {
            let d = la.distance(lb);
            let bound = 2.0 * cfg.limit.tol + LIMIT_MARGIN;
            let c = if d <= bound {
                Consistency::Transfers
            } else {
                Consistency::Violates {
                    reason: format!("limits differ by {d:e} > {bound:e}"),
                }
            };
            (Some(d), c)
        }
        _ if b.clean() => (
            None,
            Consistency::Violates {
                reason: format!("A converges but B is {:?}", b.estimate.status).to_lowercase(),
            },
        ),
        _ => (
            None,
            Consistency::Inconclusive {
                reason: format!("B undefined at {} grid points", b.failures),
            },
        ),
    };
    InclusionCase {
        label,
        a,
        b: Some(b),
        distance,
        consistency,
    }
}

/// Runs both methods on every test input and classifies the pair.
pub fn inclusion_experiment(a: &Method, b: &Method, tests: &[Source], depth: u32, cfg: &EvalConfig) -> Result<InclusionReport> {
    cfg.validate()?;
    let cases: Vec<InclusionCase> = tests.par_iter().map(|v| classify(a, b, v, depth, cfg)).collect();
    let summary = Summary::of(cases.iter().map(|c| &c.consistency));
    Ok(InclusionReport {
        a: a.label(),
        b: b.label(),
        depth,
        tol: cfg.limit.tol,
        cases,
        summary,
    })
}

type OperatorFn = Arc<dyn Fn(f64) -> Operator + Send + Sync>;

/// A family `t ↦ S_t` of operators on `ℂ^d` with a target operator `S` and
/// witnesses on which `S_t w → S w` is expected.
#[derive(Clone)]
pub struct OperatorFamily {
    space: Space,
    domain: IndexDomain,
    s_t: OperatorFn,
    target: Operator,
    witnesses: Vec<Vector>,
    stable_from: Option<u64>,
    label: String,
}

impl fmt::Debug for OperatorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorFamily")
            .field("label", &self.label)
            .field("space", &self.space)
            .field("domain", &self.domain)
            .finish()
    }
}

impl OperatorFamily {
    pub fn new<F>(label: impl Into<String>, space: Space, domain: IndexDomain, s_t: F, target: Operator, witnesses: Vec<Vector>) -> Result<Self>
    where
        F: Fn(f64) -> Operator + Send + Sync + 'static,
    {
        let d = space.dim();
        if target.rows() != d || target.cols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: target.rows().max(target.cols()),
            });
        }
        let probe = s_t(0.0);
        if probe.rows() != d || probe.cols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: probe.rows().max(probe.cols()),
            });
        }
        if let Some(w) = witnesses.iter().find(|w| w.space() != space) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: w.dim(),
            });
        }
        Ok(OperatorFamily {
            space,
            domain,
            s_t: Arc::new(s_t),
            target,
            witnesses,
            stable_from: None,
            label: label.into(),
        })
    }

    /// `S_n = diag(1, …, 1, 0, …, 0)` with `n + 1` ones, `S = I`, witnesses
    /// the standard basis. `S_n = I` from `n = d − 1` on.
    pub fn truncations(space: Space) -> Self {
        let d = space.dim();
        let witnesses = (0..d).map(|k| space.basis(k).expect("k < d")).collect();
        let mut fam = Self::new(
            "truncations",
            space,
            IndexDomain::DiscreteNat,
            move |t| {
                let n = t as usize;
                let diag: Vec<Scalar> = (0..d).map(|k| Scalar::new(if k <= n { 1.0 } else { 0.0 }, 0.0)).collect();
                Operator::diagonal(&diag)
            },
            Operator::identity(d),
            witnesses,
        )
        .expect("consistent dimensions");
        fam.stable_from = Some(d as u64 - 1);
        fam
    }

    /// `S_n = (1 + (−1)^n) P + (I − P)` with `P` the projection onto the
    /// first `k` coordinates and `S = I`. Only the witnesses outside the
    /// range of `P` converge.
    pub fn oscillating_projection(space: Space, k: usize) -> Result<Self> {
        let d = space.dim();
        if k == 0 || k >= d {
            return Err(Error::usage(format!("projection rank must lie in 1..{d}, got {k}")));
        }
        let witnesses = (k..d).map(|j| space.basis(j).expect("j < d")).collect();
        Self::new(
            "oscillating_projection",
            space,
            IndexDomain::DiscreteNat,
            move |t| {
                let sign = if (t as u64) % 2 == 0 { 2.0 } else { 0.0 };
                let diag: Vec<Scalar> = (0..d).map(|j| Scalar::new(if j < k { sign } else { 1.0 }, 0.0)).collect();
                Operator::diagonal(&diag)
            },
            Operator::identity(d),
            witnesses,
        )
    }

    /// Declares `S_t = S_{n0}` for all `t ≥ n0` (discrete families only).
    pub fn with_stable_from(mut self, n0: u64) -> Self {
        self.stable_from = Some(n0);
        self
    }

    pub fn with_witnesses(mut self, witnesses: Vec<Vector>) -> Self {
        self.witnesses = witnesses;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn operator_at(&self, t: f64) -> Operator {
        (self.s_t)(t)
    }

    pub fn target(&self) -> &Operator {
        &self.target
    }

    pub fn witnesses(&self) -> &[Vector] {
        &self.witnesses
    }

    /// `t ↦ S_t x` as a method input.
    pub fn orbit(&self, x: &Vector) -> Source {
        let s_t = self.s_t.clone();
        let coords = x.coords().to_vec();
        match self.domain {
            IndexDomain::DiscreteNat => {
                let src = SequenceSource::from_fn(self.space, move |n, out| {
                    s_t(n as f64).apply_into(&coords, out);
                })
                .with_label(format!("{}·x", self.label));
                Source::Sequence(match self.stable_from {
                    Some(n0) => src.with_stable_from(n0),
                    None => src,
                })
            }
            IndexDomain::HalfOpen { .. } => Source::Function(
                FunctionSource::from_fn(self.space, move |t, out| {
                    s_t(t).apply_into(&coords, out);
                })
                .with_label(format!("{}·x", self.label)),
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub id: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeOutcome {
    pub probe: Vector,
    pub expected: Vector,
    pub a: MethodOutcome,
    pub b: MethodOutcome,
    pub a_error: Option<f64>,
    pub b_error: Option<f64>,
    pub consistency: Consistency,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TransferStatus {
    Completed { summary: Summary },
    NotApplicable { hypothesis: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferReport {
    pub a: String,
    pub b: String,
    pub family: String,
    pub depth: u32,
    pub tol: f64,
    pub hypotheses: Vec<HypothesisCheck>,
    pub probes: Vec<ProbeOutcome>,
    pub status: TransferStatus,
}

/// Depths and tolerances of the hypothesis battery.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferConfig {
    /// Depth at which the family's limit, A-summability and B-summability
    /// of the probes are evaluated.
    pub depth: u32,
    /// Parameter depth of the regularity check of `B`.
    pub regularity_depth: u32,
    /// Depth and tolerance of the scalar inclusion battery.
    pub battery_depth: u32,
    pub battery_tol: f64,
}

impl Default for TransferConfig {
    fn default() -> Self {
        TransferConfig {
            depth: 30,
            regularity_depth: 14,
            battery_depth: 14,
            battery_tol: 1e-3,
        }
    }
}

/// Scalar test inputs used to validate scalar inclusion `A ⊆ B`.
pub fn scalar_battery(domain: IndexDomain) -> Vec<Source> {
    let c = |x: f64| Scalar::new(x, 0.0);
    match domain {
        IndexDomain::DiscreteNat => vec![
            SequenceSource::scalar_fn(move |_| c(1.0)).with_stable_from(0).with_label("one").into(),
            SequenceSource::scalar_fn(move |n| c(1.0 / (n as f64 + 1.0))).with_label("harmonic").into(),
            SequenceSource::scalar_fn(move |n| c(2.0 + 0.5f64.powi(n.min(2000) as i32))).with_label("geometric").into(),
            SequenceSource::partial_sums(SequenceSource::scalar_fn(move |n| c(if n % 2 == 0 { 1.0 } else { -1.0 })))
                .with_label("alternating_series")
                .into(),
            SequenceSource::scalar_fn(move |n| Scalar::new(0.0, if n % 2 == 0 { 1.0 } else { -1.0 }))
                .with_label("alternating")
                .into(),
        ],
        IndexDomain::HalfOpen { right } => {
            let bounded = right.is_finite();
            vec![
                FunctionSource::scalar_fn(move |_| c(1.0)).with_label("one").into(),
                FunctionSource::scalar_fn(move |t| if bounded { c(1.0 - t / right) } else { c((-t).exp()) })
                    .with_label("decaying")
                    .into(),
            ]
        }
    }
}

fn regularity_of(b: &Method, depth: u32, cfg: &EvalConfig) -> Result<Overall> {
    let kernel = |k: &KernelMethod| -> Result<Overall> {
        let check = KernelCheckConfig {
            r_depth: depth,
            exhaust_depth: (depth / 2).max(1),
            tol: 1e-6,
        };
        Ok(check_kernel_st(k, &check, cfg)?.overall)
    };
    match b {
        Method::Matrix(m) => {
            let grid: Vec<u64> = default_m_grid().into_iter().take(depth as usize).collect();
            Ok(check_matrix_st(m, &grid, *grid.last().unwrap_or(&2), 1e-6)?.overall)
        }
        Method::SeqToFunc(SeqToFuncMethod::Abel) => kernel(&KernelMethod::abel()),
        Method::SeqToFunc(s @ SeqToFuncMethod::Custom { .. }) => {
            let s = s.clone();
            let k = KernelMethod::new(
                s.label(),
                IndexDomain::DiscreteNat,
                IndexDomain::unit_interval(),
                crate::methods::Measure::Counting,
                move |r, n| s.coeff(n as u64, r),
                |_| (0.0, f64::INFINITY),
            )?;
            kernel(&k)
        }
        Method::Kernel(k) => kernel(k),
    }
}

fn is_cesaro_abel(a: &Method, b: &Method) -> bool {
    matches!(
        (a, b),
        (Method::Matrix(MatrixMethod::Cesaro), Method::SeqToFunc(SeqToFuncMethod::Abel))
    )
}

/// Checks that `t ↦ S_t x` is `A`- and `B`-summable to `S x`.
pub fn probe_transfer(a: &Method, b: &Method, family: &OperatorFamily, x: &Vector, depth: u32, cfg: &EvalConfig) -> Result<ProbeOutcome> {
    let expected = family.target().apply_same(x)?;
    let orbit = family.orbit(x);
    let a_run = run_method(a, &orbit, depth, cfg);
    let b_run = run_method(b, &orbit, depth, cfg);
    let err = |o: &MethodOutcome| o.estimate.value.as_ref().map(|v| v.distance(&expected));
    let (a_error, b_error) = (err(&a_run), err(&b_run));
    let tol = cfg.limit.tol;
    let consistency = match (a_error, b_error) {
        (Some(ea), _) if ea > tol => Consistency::Vacuous,
        (None, _) if a_run.clean() => Consistency::Vacuous,
        (None, _) => Consistency::Inconclusive {
            reason: "A undefined on part of the grid".into(),
        },
        (Some(_), Some(eb)) if eb <= tol => Consistency::Transfers,
        (Some(_), Some(eb)) => Consistency::Violates {
            reason: format!("B limit misses S x by {eb:e}"),
        },
        (Some(_), None) if b_run.clean() => Consistency::Violates {
            reason: format!("B is {:?}", b_run.estimate.status).to_lowercase(),
        },
        (Some(_), None) => Consistency::Inconclusive {
            reason: "B undefined on part of the grid".into(),
        },
    };
    Ok(ProbeOutcome {
        probe: x.clone(),
        expected,
        a: a_run,
        b: b_run,
        a_error,
        b_error,
        consistency,
    })
}

/// Runs the hypothesis battery, then checks every probe.
///
/// The battery: (i) the witnesses span the space and `S_t w → S w`;
/// (ii) every probe orbit is `A`-summable to `S x`; (iii) `B` shows regular
/// evidence; (iv) scalar inclusion `A ⊆ B` holds on [`scalar_battery`]. A
/// failed hypothesis makes the report NotApplicable and names it.
pub fn transfer_experiment(
    a: &Method,
    b: &Method,
    family: &OperatorFamily,
    probes: &[Vector],
    tcfg: &TransferConfig,
    cfg: &EvalConfig,
) -> Result<TransferReport> {
    cfg.validate()?;
    let tol = cfg.limit.tol;
    let mut hypotheses = Vec::new();
    let report = |hypotheses: Vec<HypothesisCheck>, probes: Vec<ProbeOutcome>| {
        let status = match hypotheses.iter().find(|h| !h.passed) {
            Some(h) => TransferStatus::NotApplicable {
                hypothesis: format!("{}: {}", h.id, h.detail),
            },
            None => TransferStatus::Completed {
                summary: Summary::of(probes.iter().map(|p| &p.consistency)),
            },
        };
        TransferReport {
            a: a.label(),
            b: b.label(),
            family: family.label().to_string(),
            depth: tcfg.depth,
            tol,
            hypotheses,
            probes,
            status,
        }
    };

    // (i)
    let d = family.space().dim();
    let span = rank(family.witnesses(), 1e-12);
    let grid = parameter_grid(family.domain, tcfg.depth)?;
    let mut worst = 0.0f64;
    for w in family.witnesses() {
        let sw = family.target().apply_same(w)?;
        let tail = &grid[grid.len().saturating_sub(cfg.limit.window)..];
        for &t in tail {
            worst = worst.max(family.operator_at(t).apply_same(w)?.distance(&sw));
        }
    }
    let ok = span == d && worst <= tol;
    hypotheses.push(HypothesisCheck {
        id: "(i) witnesses",
        passed: ok,
        detail: format!(
            "{} witnesses of rank {span} in dimension {d}; max ‖S_t w − S w‖ on the last {} grid points = {worst:e}",
            family.witnesses().len(),
            cfg.limit.window
        ),
    });
    if !ok {
        return Ok(report(hypotheses, Vec::new()));
    }

    // (ii)
    let a_checks: Vec<Result<ProbeOutcome>> = probes
        .par_iter()
        .map(|x| probe_transfer(a, a, family, x, tcfg.depth, cfg))
        .collect();
    let mut bad = None;
    for (i, r) in a_checks.iter().enumerate() {
        match r {
            Ok(p) if p.a_error.is_some_and(|e| e <= tol) => {}
            Ok(p) => {
                bad = Some(format!(
                    "probe {i}: A status {:?}, error {:?}",
                    p.a.estimate.status, p.a_error
                ))
            }
            Err(e) => bad = Some(format!("probe {i}: {e}")),
        }
        if bad.is_some() {
            break;
        }
    }
    hypotheses.push(HypothesisCheck {
        id: "(ii) A-summable to S x",
        passed: bad.is_none(),
        detail: bad.unwrap_or_else(|| format!("{} probes within {tol:e}", probes.len())),
    });
    if !hypotheses.last().expect("pushed").passed {
        return Ok(report(hypotheses, Vec::new()));
    }

    // (iii)
    let reg = regularity_of(b, tcfg.regularity_depth, cfg)?;
    hypotheses.push(HypothesisCheck {
        id: "(iii) B regular",
        passed: reg == Overall::RegularEvidence,
        detail: format!("regularity check: {}", reg.label()),
    });
    if reg != Overall::RegularEvidence {
        return Ok(report(hypotheses, Vec::new()));
    }

    // (iv)
    let battery_cfg = EvalConfig {
        limit: LimitConfig {
            tol: tcfg.battery_tol,
            ..cfg.limit
        },
        ..*cfg
    };
    let battery = inclusion_experiment(a, b, &scalar_battery(a.input_domain()), tcfg.battery_depth, &battery_cfg)?;
    let s = &battery.summary;
    let ok = s.violates == 0 && s.inconclusive == 0 && s.transfers > 0;
    let mut detail = format!(
        "scalar battery: {} transfers, {} vacuous, {} violates, {} inconclusive",
        s.transfers, s.vacuous, s.violates, s.inconclusive
    );
    if ok && is_cesaro_abel(a, b) {
        detail.push_str("; Cesàro ⊆ Abel is a known theorem, confirmed by the battery");
    }
    hypotheses.push(HypothesisCheck {
        id: "(iv) scalar inclusion",
        passed: ok,
        detail,
    });
    if !ok {
        return Ok(report(hypotheses, Vec::new()));
    }

    let outcomes: Vec<ProbeOutcome> = probes
        .par_iter()
        .map(|x| probe_transfer(a, b, family, x, tcfg.depth, cfg))
        .collect::<Result<_>>()?;
    Ok(report(hypotheses, outcomes))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakCase {
    pub test: usize,
    pub functional: usize,
    pub case: InclusionCase,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakInclusionReport {
    pub a: String,
    pub b: String,
    pub depth: u32,
    pub tol: f64,
    pub cases: Vec<WeakCase>,
    pub summary: Summary,
}

/// For every test `v` and functional `φ`, classifies the scalar input
/// `φ∘v` as in [`inclusion_experiment`].
pub fn weak_inclusion_experiment(
    a: &Method,
    b: &Method,
    tests: &[Source],
    functionals: &[LinearFunctional],
    depth: u32,
    cfg: &EvalConfig,
) -> Result<WeakInclusionReport> {
    cfg.validate()?;
    let mut jobs = Vec::new();
    for (i, v) in tests.iter().enumerate() {
        for (j, phi) in functionals.iter().enumerate() {
            jobs.push((i, j, v.map_functional(phi)?));
        }
    }
    let cases: Vec<WeakCase> = jobs
        .par_iter()
        .map(|(i, j, src)| WeakCase {
            test: *i,
            functional: *j,
            case: classify(a, b, src, depth, cfg),
        })
        .collect();
    let summary = Summary::of(cases.iter().map(|c| &c.case.consistency));
    Ok(WeakInclusionReport {
        a: a.label(),
        b: b.label(),
        depth,
        tol: cfg.limit.tol,
        cases,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vspace::NormKind;

    fn c(x: f64) -> Scalar {
        Scalar::new(x, 0.0)
    }

    fn sign(n: u64) -> f64 {
        if n % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    #[test]
    fn cesaro_abel_examples() {
        let cfg = EvalConfig::with_tol(1e-3);
        let series: Source = SequenceSource::partial_sums(SequenceSource::scalar_fn(|n| c(sign(n)))).into();
        let rep = inclusion_experiment(&Method::cesaro(), &Method::abel(), &[series], 14, &cfg).unwrap();
        assert_eq!(rep.cases[0].consistency, Consistency::Transfers);

        let witness: Source = SequenceSource::scalar_fn(|n| c(sign(n) * (n as f64 + 1.0))).into();
        let rep = inclusion_experiment(&Method::abel(), &Method::cesaro(), &[witness], 14, &cfg).unwrap();
        let case = &rep.cases[0];
        assert!(case.a.estimate.is_converged());
        assert!(case.a.estimate.value.as_ref().unwrap().norm() <= 1e-3);
        assert!(matches!(case.consistency, Consistency::Violates { .. }), "{case:#?}");

        let harmonic: Source = SequenceSource::scalar_fn(|n| c(1.0 / (n as f64 + 1.0))).into();
        let rep = inclusion_experiment(&Method::Matrix(MatrixMethod::Identity), &Method::cesaro(), &[harmonic], 14, &EvalConfig::with_tol(0.01)).unwrap();
        assert_eq!(rep.cases[0].consistency, Consistency::Transfers, "{:#?}", rep.cases[0]);
    }

    #[test]
    fn truncation_transfer() {
        let sp = Space::new(4, NormKind::L2).unwrap();
        let fam = OperatorFamily::truncations(sp);
        let probes = vec![
            Vector::from_reals(sp, &[0.3, -1.0, 2.0, 0.5]).unwrap(),
            sp.zero(),
        ];
        let rep = transfer_experiment(&Method::cesaro(), &Method::abel(), &fam, &probes, &TransferConfig::default(), &EvalConfig::with_tol(1e-6)).unwrap();
        assert!(
            matches!(rep.status, TransferStatus::Completed { ref summary } if summary.transfers == 2),
            "{:#?}",
            rep
        );
    }

    #[test]
    fn oscillating_projection_is_not_applicable_but_probes_transfer() {
        let sp = Space::new(3, NormKind::L2).unwrap();
        let fam = OperatorFamily::oscillating_projection(sp, 1).unwrap();
        let x = Vector::from_reals(sp, &[1.0, 2.0, -1.0]).unwrap();
        let cfg = EvalConfig::with_tol(1e-3);
        let rep = transfer_experiment(&Method::cesaro(), &Method::abel(), &fam, &[x.clone()], &TransferConfig::default(), &cfg).unwrap();
        assert!(matches!(rep.status, TransferStatus::NotApplicable { ref hypothesis } if hypothesis.starts_with("(i)")));
        let p = probe_transfer(&Method::cesaro(), &Method::abel(), &fam, &x, 14, &cfg).unwrap();
        assert_eq!(p.consistency, Consistency::Transfers, "{p:#?}");
    }
}
