//! Numerical Silverman-Toeplitz checks for matrix and kernel methods, and
//! the group norm of a scalar row.
//!
//! A finite grid cannot prove a quantified limit statement, so every
//! condition gets one of three verdicts: `Pass` (evidence), `Fail` (with a
//! concrete witness) or `Inconclusive`. Trends are judged on the last half of
//! the grid by a least-squares slope of `log(value)` against
//! `log(scale(p))`, where `scale` maps the grid point to a magnitude growing
//! toward infinity (`m` on ℕ, `1/(1 − r)` on `[0, 1)`, `t` on `[0, ∞)`).
//!
//! Verdicts only cover the sampled grid: boundedness in the essential-sup
//! sense on the parameter domain is not testable from samples.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domains::{exhaustion, parameter_grid, IndexDomain};
use crate::error::Result;
use crate::methods::{EvalConfig, KernelMethod, MatrixMethod, RowSupport};
use crate::vspace::Scalar;

/// Slope above which a sequence of values counts as growing.
pub const GROWTH_SLOPE: f64 = 0.05;
/// Slope at or below which a sequence of values counts as decaying.
pub const DECAY_SLOPE: f64 = -0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub condition: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Overall {
    RegularEvidence,
    NotRegular { witness: Witness },
    Inconclusive,
}

impl Overall {
    pub fn label(&self) -> &'static str {
        match self {
            Overall::RegularEvidence => "regular_evidence",
            Overall::NotRegular { .. } => "not_regular",
            Overall::Inconclusive => "inconclusive",
        }
    }
}

/// One evaluated grid cell of a condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub grid_param: f64,
    pub value: Option<Scalar>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionRecord {
    /// `c1`, `c2[n=3]`, `k3[j=5]`, ...
    pub id: String,
    pub cells: Vec<Cell>,
    pub verdict: Verdict,
    pub detail: String,
}

impl ConditionRecord {
    pub fn values(&self) -> Vec<Option<f64>> {
        self.cells.iter().map(|c| c.value.map(|v| v.re)).collect()
    }
}

fn combine(conditions: &[ConditionRecord]) -> Overall {
    if let Some(c) = conditions.iter().find(|c| c.verdict == Verdict::Fail) {
        return Overall::NotRegular {
            witness: Witness {
                condition: c.id.clone(),
                detail: c.detail.clone(),
            },
        };
    }
    if conditions.iter().any(|c| c.verdict == Verdict::Inconclusive) {
        Overall::Inconclusive
    } else {
        Overall::RegularEvidence
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, _)| **x > 0.0)
        .map(|(x, y)| (x.ln(), y.max(f64::MIN_POSITIVE).ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

fn last_half<T: Copy>(xs: &[T]) -> &[T] {
    let n = xs.len();
    let keep = n.div_ceil(2).max(2.min(n));
    &xs[n - keep..]
}

/// Decay-to-zero verdict for nonnegative values on the last half of a grid.
pub fn decay_verdict(scales: &[f64], values: &[f64], tol: f64) -> (Verdict, String) {
    let s = last_half(scales);
    let v = last_half(values);
    let Some(&last) = v.last() else {
        return (Verdict::Inconclusive, "no samples".into());
    };
    if v.iter().any(|x| !x.is_finite()) {
        return (Verdict::Fail, format!("non-finite value {last}"));
    }
    if v.iter().all(|&x| x <= tol) {
        return (Verdict::Pass, format!("all tail values ≤ {tol:e}"));
    }
    let nonincreasing = v.windows(2).all(|w| w[1] <= w[0]);
    if nonincreasing && last <= tol {
        return (Verdict::Pass, format!("decreasing to {last:e} ≤ {tol:e}"));
    }
    let Some(slope) = loglog_slope(s, v) else {
        return (Verdict::Inconclusive, "too few samples for a trend".into());
    };
    if nonincreasing && slope <= DECAY_SLOPE {
        (Verdict::Pass, format!("decreasing, log-log slope {slope:.3}, last {last:e}"))
    } else if slope > DECAY_SLOPE && last > tol {
        (Verdict::Fail, format!("no decay: log-log slope {slope:.3}, last value {last:e}"))
    } else {
        (Verdict::Inconclusive, format!("log-log slope {slope:.3}, last {last:e}"))
    }
}

/// Boundedness verdict: growth with log-log slope above [`GROWTH_SLOPE`]
/// over the last half of the grid is a witness of unboundedness.
pub fn bounded_verdict(scales: &[f64], values: &[f64]) -> (Verdict, String) {
    if values.iter().any(|x| !x.is_finite()) {
        return (Verdict::Fail, "non-finite value".into());
    }
    let sup = values.iter().copied().fold(0.0, f64::max);
    let Some(&last) = values.last() else {
        return (Verdict::Inconclusive, "no samples".into());
    };
    if values.iter().all(|&x| x == 0.0) {
        return (Verdict::Pass, "all values zero".into());
    }
    match loglog_slope(last_half(scales), last_half(values)) {
        Some(slope) if slope > GROWTH_SLOPE => (
            Verdict::Fail,
            format!("unbounded growth: log-log slope {slope:.3}, last value {last}"),
        ),
        Some(slope) => (Verdict::Pass, format!("sup {sup} on grid, log-log slope {slope:.3}")),
        None => (Verdict::Inconclusive, "too few samples for a trend".into()),
    }
}

fn record(id: String, grid: &[f64], scales: &[f64], cells: Vec<Cell>, judge: impl Fn(&[f64], &[f64]) -> (Verdict, String)) -> ConditionRecord {
    if let Some(bad) = cells.iter().find(|c| c.value.is_none()) {
        let detail = format!(
            "undefined at {}: {}",
            bad.grid_param,
            bad.note.clone().unwrap_or_default()
        );
        return ConditionRecord {
            id,
            cells,
            verdict: Verdict::Inconclusive,
            detail,
        };
    }
    debug_assert_eq!(grid.len(), cells.len());
    let values: Vec<f64> = cells.iter().map(|c| c.value.expect("checked").re).collect();
    let (verdict, detail) = judge(scales, &values);
    ConditionRecord {
        id,
        cells,
        verdict,
        detail,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixRegularityReport {
    pub method: String,
    pub tol: f64,
    pub m_grid: Vec<u64>,
    pub n_max: u64,
    pub c1: ConditionRecord,
    pub c2: Vec<ConditionRecord>,
    pub c3: ConditionRecord,
    pub overall: Overall,
}

impl MatrixRegularityReport {
    pub fn conditions(&self) -> Vec<&ConditionRecord> {
        std::iter::once(&self.c1).chain(&self.c2).chain(std::iter::once(&self.c3)).collect()
    }
}

/// Number of columns examined for the column condition.
pub const MATRIX_COLUMNS: u64 = 8;

/// The default matrix grid `m = 2^k`, `k = 1..=14`.
pub fn default_m_grid() -> Vec<u64> {
    (1..=14).map(|k| 1u64 << k).collect()
}

/// Checks the three Silverman-Toeplitz conditions for a matrix method:
/// bounded absolute row sums, columns tending to zero, row sums tending to 1.
///
/// Rows are summed over `n ≤ n_max`; unbounded rows whose entries beyond
/// `n_max` are not negligible give Inconclusive cells.
pub fn check_matrix_st(spec: &MatrixMethod, m_grid: &[u64], n_max: u64, tol: f64) -> Result<MatrixRegularityReport> {
    if m_grid.is_empty() {
        return Err(crate::error::Error::usage("matrix regularity check needs a nonempty grid"));
    }
    let grid: Vec<f64> = m_grid.iter().map(|&m| m as f64).collect();
    let scales: Vec<f64> = grid.iter().map(|&m| IndexDomain::DiscreteNat.scale(m)).collect();

    let sums: Vec<_> = m_grid
        .par_iter()
        .map(|&m| {
            let rs = spec.row_sums(m, n_max);
            let note = if rs.complete {
                None
            } else {
                row_tail_note(spec, m, n_max, tol)
            };
            (rs, note)
        })
        .collect();
    let cells = |f: &dyn Fn(&crate::methods::RowSums) -> Scalar| -> Vec<Cell> {
        grid.iter()
            .zip(&sums)
            .map(|(&p, (rs, note))| Cell {
                grid_param: p,
                value: if note.is_some() { None } else { Some(f(rs)) },
                note: note.clone(),
            })
            .collect()
    };

    let c1 = record("c1".into(), &grid, &scales, cells(&|rs| Scalar::new(rs.abs_sum, 0.0)), bounded_verdict);
    let c2 = (0..MATRIX_COLUMNS.min(n_max + 1))
        .map(|n| {
            let col: Vec<Cell> = grid
                .iter()
                .map(|&p| Cell {
                    grid_param: p,
                    value: Some(Scalar::new(spec.entry(p as u64, n).norm(), 0.0)),
                    note: None,
                })
                .collect();
            record(format!("c2[n={n}]"), &grid, &scales, col, |s, v| decay_verdict(s, v, tol))
        })
        .collect::<Vec<_>>();
    let dist: Vec<f64> = sums.iter().map(|(rs, _)| (rs.sum - 1.0).norm()).collect();
    let mut c3 = record("c3".into(), &grid, &scales, cells(&|rs| rs.sum), |s, _| decay_verdict(s, &dist, tol));
    if c3.verdict == Verdict::Fail {
        c3.detail = format!("row sums do not tend to 1: {}", c3.detail);
    }
    let mut all = vec![c1.clone()];
    all.extend(c2.iter().cloned());
    all.push(c3.clone());
    Ok(MatrixRegularityReport {
        method: spec.label(),
        tol,
        m_grid: m_grid.to_vec(),
        n_max,
        c1,
        c2,
        c3,
        overall: combine(&all),
    })
}

/// For an unbounded row truncated at `n_max`, a note when the entries near
/// `n_max` do not decay geometrically below `tol`.
fn row_tail_note(spec: &MatrixMethod, m: u64, n_max: u64, tol: f64) -> Option<String> {
    if spec.support() != RowSupport::Infinite || n_max < 2 {
        return None;
    }
    let a1 = spec.entry(m, n_max - 1).norm();
    let a2 = spec.entry(m, n_max).norm();
    if a2 == 0.0 && a1 == 0.0 {
        return None;
    }
    let q = if a1 > 0.0 { a2 / a1 } else { f64::INFINITY };
    if q < 1.0 && a2 * q / (1.0 - q) <= tol {
        None
    } else {
        Some(format!("row {m} tail beyond n = {n_max} not certified"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelRegularityReport {
    pub method: String,
    pub tol: f64,
    pub r_grid: Vec<f64>,
    pub windows: Vec<f64>,
    pub k1: ConditionRecord,
    pub k2: ConditionRecord,
    pub k3: Vec<ConditionRecord>,
    pub k4: ConditionRecord,
    pub overall: Overall,
}

impl KernelRegularityReport {
    pub fn conditions(&self) -> Vec<&ConditionRecord> {
        [&self.k1, &self.k2]
            .into_iter()
            .chain(&self.k3)
            .chain(std::iter::once(&self.k4))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelCheckConfig {
    pub r_depth: u32,
    /// Should stay well below `r_depth`: a window that still contains the
    /// whole kernel mass at every grid point shows no decay.
    pub exhaust_depth: u32,
    pub tol: f64,
}

impl Default for KernelCheckConfig {
    fn default() -> Self {
        KernelCheckConfig {
            r_depth: 20,
            exhaust_depth: 12,
            tol: 1e-6,
        }
    }
}

/// Checks the four kernel conditions: integrability of `t ↦ a(r, t)` at each
/// grid point, a bounded sup of those integrals, decay of the mass on every
/// compact window, and total mass tending to 1.
pub fn check_kernel_st(spec: &KernelMethod, check: &KernelCheckConfig, eval: &EvalConfig) -> Result<KernelRegularityReport> {
    eval.validate()?;
    let grid = parameter_grid(spec.f(), check.r_depth)?;
    let scales: Vec<f64> = grid.iter().map(|&r| spec.f().scale(r)).collect();
    let windows: Vec<f64> = (0..=check.exhaust_depth)
        .map(|j| exhaustion(spec.e(), j).upper())
        .collect();
    let tol = check.tol;

    let eval_cell = |r: f64, cap: f64, absolute: bool| -> Cell {
        let res = if absolute {
            spec.integrate_kernel(r, cap, |a| Scalar::new(a.norm(), 0.0), eval)
        } else {
            spec.integrate_kernel(r, cap, |a| a, eval)
        };
        match res {
            Ok(v) => Cell {
                grid_param: r,
                value: Some(v),
                note: None,
            },
            Err(e) => Cell {
                grid_param: r,
                value: None,
                note: Some(e.to_string()),
            },
        }
    };

    let abs_cells: Vec<Cell> = grid.par_iter().map(|&r| eval_cell(r, f64::INFINITY, true)).collect();
    let k1 = record("k1".into(), &grid, &scales, abs_cells.clone(), |_, v| {
        if v.iter().all(|x| x.is_finite()) {
            (Verdict::Pass, "integrable at every grid point".into())
        } else {
            (Verdict::Fail, "non-finite absolute integral".into())
        }
    });
    let k2 = record("k2".into(), &grid, &scales, abs_cells, bounded_verdict);

    let k3: Vec<ConditionRecord> = windows
        .iter()
        .enumerate()
        .map(|(j, &cap)| {
            let cells: Vec<Cell> = grid.par_iter().map(|&r| eval_cell(r, cap, true)).collect();
            record(format!("k3[j={j}]"), &grid, &scales, cells, |s, v| decay_verdict(s, v, tol))
        })
        .collect();

    let mass: Vec<Cell> = grid.par_iter().map(|&r| eval_cell(r, f64::INFINITY, false)).collect();
    let dist: Vec<f64> = mass
        .iter()
        .map(|c| c.value.map_or(f64::NAN, |v| (v - 1.0).norm()))
        .collect();
    let mut k4 = record("k4".into(), &grid, &scales, mass, |s, _| decay_verdict(s, &dist, tol));
    if k4.verdict == Verdict::Fail {
        let last = k4.cells.last().and_then(|c| c.value).unwrap_or_default();
        k4.detail = format!("total mass does not tend to 1 (last value {}): {}", last.re, k4.detail);
    }

    let mut all = vec![k1.clone(), k2.clone()];
    all.extend(k3.iter().cloned());
    all.push(k4.clone());
    Ok(KernelRegularityReport {
        method: spec.label().to_string(),
        tol,
        r_grid: grid,
        windows,
        k1,
        k2,
        k3,
        k4,
        overall: combine(&all),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupNormValue {
    pub value: f64,
    pub truncation: u64,
}

/// `Σ_{k ≤ n} |a_k|`: the group norm of the row of operators `a_k · I`.
///
/// Summed left to right, so the value is nondecreasing in `n`.
pub fn group_norm_scalar_row<F>(coeffs: F, n: u64) -> GroupNormValue
where
    F: Fn(u64) -> Scalar,
{
    let value = (0..=n).map(|k| coeffs(k).norm()).fold(0.0, |acc, x| acc + x);
    GroupNormValue { value, truncation: n }
}

/// Group norm of row `m` of a matrix method, using the closed-form row sums
/// of the built-in methods (so every Cesàro row gives exactly 1).
pub fn group_norm_matrix_row(spec: &MatrixMethod, m: u64, n: u64) -> GroupNormValue {
    match spec {
        MatrixMethod::Custom { .. } => group_norm_scalar_row(|k| spec.entry(m, k), n),
        _ => GroupNormValue {
            value: spec.row_sums(m, n).abs_sum,
            truncation: n,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_matrix_verdicts() {
        let grid = default_m_grid();
        let ces = check_matrix_st(&MatrixMethod::Cesaro, &grid, 1 << 14, 1e-6).unwrap();
        assert_eq!(ces.overall, Overall::RegularEvidence);
        assert!(ces.c3.values().iter().all(|v| *v == Some(1.0)));
        let id = check_matrix_st(&MatrixMethod::Identity, &grid, 1 << 14, 1e-6).unwrap();
        assert_eq!(id.overall, Overall::RegularEvidence);
        let ss = check_matrix_st(&MatrixMethod::SeriesSummation, &grid, 1 << 14, 1e-6).unwrap();
        match ss.overall {
            Overall::NotRegular { witness } => assert_eq!(witness.condition, "c1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn group_norm_examples() {
        assert_eq!(group_norm_scalar_row(|k| Scalar::new(if k <= 4 { 0.2 } else { 0.0 }, 0.0), 4).value, 1.0);
        assert_eq!(group_norm_scalar_row(|_| Scalar::new(0.0, 0.0), 10).value, 0.0);
        let g = group_norm_scalar_row(|k| Scalar::new((-0.5f64).powi(k as i32), 0.0), 60);
        assert!((g.value - 2.0).abs() < 1e-15);
        for m in 0..2000 {
            assert_eq!(group_norm_matrix_row(&MatrixMethod::Cesaro, m, m).value, 1.0);
        }
    }

    #[test]
    fn slope_of_power_law() {
        let xs: Vec<f64> = (1..10).map(|k| 2f64.powi(k)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 / x).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() + 1.0).abs() < 1e-12);
    }

    fn verdicts(r: &KernelRegularityReport) -> Vec<(String, Verdict)> {
        r.conditions().iter().map(|c| (c.id.clone(), c.verdict)).collect()
    }

    #[test]
    fn logarithmic_kernel_and_its_double() {
        let eval = EvalConfig::default();
        let check = KernelCheckConfig::default();
        let log = check_kernel_st(&KernelMethod::logarithmic(), &check, &eval).unwrap();
        assert_eq!(log.overall, Overall::RegularEvidence, "{:#?}", log.conditions());
        for c in &log.k4.cells {
            assert!((c.value.unwrap().re - 1.0).abs() < 1e-8);
        }
        let double = check_kernel_st(&KernelMethod::logarithmic().scaled(Scalar::new(2.0, 0.0)), &check, &eval).unwrap();
        assert!(matches!(double.overall, Overall::NotRegular { ref witness } if witness.condition == "k4"));
        for ((id, a), (_, b)) in verdicts(&log).into_iter().zip(verdicts(&double)) {
            assert_eq!(a == b, id != "k4", "{id}");
        }
    }

    #[test]
    fn translation_kernel_is_regular() {
        let check = KernelCheckConfig {
            r_depth: 16,
            exhaust_depth: 6,
            tol: 1e-6,
        };
        let rep = check_kernel_st(&KernelMethod::translation(), &check, &EvalConfig::default()).unwrap();
        assert_eq!(rep.overall, Overall::RegularEvidence, "{:#?}", rep.conditions());
    }

    #[test]
    fn matrix_and_kernel_forms_agree() {
        let check = KernelCheckConfig {
            r_depth: 14,
            exhaust_depth: 6,
            tol: 1e-6,
        };
        for m in [MatrixMethod::Identity, MatrixMethod::Cesaro, MatrixMethod::SeriesSummation] {
            let a = check_matrix_st(&m, &default_m_grid(), 1 << 14, 1e-6).unwrap();
            let b = check_kernel_st(&KernelMethod::from_matrix(m.clone()), &check, &EvalConfig::default()).unwrap();
            assert_eq!(a.overall.label(), b.overall.label(), "{}", m.label());
        }
    }

    #[test]
    fn abel_kernel_rows_sum_to_one() {
        let check = KernelCheckConfig {
            r_depth: 14,
            exhaust_depth: 6,
            tol: 1e-6,
        };
        let rep = check_kernel_st(&KernelMethod::abel(), &check, &EvalConfig::default()).unwrap();
        assert_eq!(rep.overall, Overall::RegularEvidence, "{:#?}", rep.conditions());
        for c in &rep.k4.cells {
            assert!((c.value.unwrap().re - 1.0).abs() < 1e-12);
        }
    }
}
