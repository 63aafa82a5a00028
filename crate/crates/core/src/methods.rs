//! Summability engines.
//!
//! A [`Method`] maps an input on an index domain `E` to a function on a
//! parameter domain `F`; its limit at the point at infinity of `F` is the
//! method's value. Three families are supported: matrix methods
//! (`E = F = ℕ`), sequence-to-function methods (`E = ℕ`, `F = [0, 1)`) and
//! kernel methods over counting or Lebesgue measure.
//!
//! Infinite sums are truncated with a tail certificate (see
//! [`TruncationPolicy`]); a sequence declared eventually constant (see
//! [`SequenceSource::with_stable_from`]) has its tail summed in closed form.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domains::{estimate_partial, parameter_grid, ConvergenceEstimate, IndexDomain, LimitConfig};
use crate::error::{Error, Result};
use crate::integrate::{adaptive_quadrature, QuadratureConfig, Substitution};
use crate::source::{FunctionSource, SequenceSource, Source};
use crate::vspace::{norm_upper_bound, Scalar, Vector};

const BLOCK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruncationPolicy {
    pub tail_tol: f64,
    pub max_terms: u64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            tail_tol: 1e-14,
            max_terms: 1_000_000,
        }
    }
}

impl TruncationPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.tail_tol > 0.0 && self.tail_tol.is_finite()) {
            return Err(Error::usage(format!("tail_tol must be positive, got {}", self.tail_tol)));
        }
        if self.max_terms == 0 {
            return Err(Error::usage("max_terms must be positive"));
        }
        Ok(())
    }
}

/// Everything an evaluation along a parameter grid needs.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub trunc: TruncationPolicy,
    pub quad: QuadratureConfig,
    pub limit: LimitConfig,
}

impl EvalConfig {
    pub fn with_tol(tol: f64) -> Self {
        EvalConfig {
            limit: LimitConfig {
                tol,
                ..LimitConfig::default()
            },
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.trunc.validate()?;
        self.quad.validate()?;
        self.limit.validate()
    }
}

pub type RowFn = Arc<dyn Fn(u64, u64) -> Scalar + Send + Sync>;
pub type CoeffFn = Arc<dyn Fn(u64, f64) -> Scalar + Send + Sync>;
pub type KernelFn = Arc<dyn Fn(f64, f64) -> Scalar + Send + Sync>;
pub type SupportFn = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

/// Which entries of row `m` may be nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowSupport {
    /// `n = m` only.
    Diagonal,
    /// `n ≤ m`.
    LowerTriangular,
    /// Unbounded; rows need a tail certificate.
    Infinite,
}

#[derive(Clone)]
pub enum MatrixMethod {
    Identity,
    /// `a_{m,n} = 1` for `n ≤ m`: the partial sums of the input read as a series.
    SeriesSummation,
    /// `a_{m,n} = 1/(m+1)` for `n ≤ m`.
    Cesaro,
    Custom {
        label: String,
        row: RowFn,
        support: RowSupport,
    },
}

impl fmt::Debug for MatrixMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Row sums of a matrix row, computed over `n ≤ n_last`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RowSums {
    pub abs_sum: f64,
    pub sum: Scalar,
    /// Index of the last entry included.
    pub n_last: u64,
    /// Whether the whole row was covered (finite support reached).
    pub complete: bool,
}

impl MatrixMethod {
    pub fn custom<F>(label: impl Into<String>, support: RowSupport, row: F) -> Self
    where
        F: Fn(u64, u64) -> Scalar + Send + Sync + 'static,
    {
        MatrixMethod::Custom {
            label: label.into(),
            row: Arc::new(row),
            support,
        }
    }

    pub fn label(&self) -> String {
        match self {
            MatrixMethod::Identity => "identity".into(),
            MatrixMethod::SeriesSummation => "series_summation".into(),
            MatrixMethod::Cesaro => "cesaro".into(),
            MatrixMethod::Custom { label, .. } => label.clone(),
        }
    }

    pub fn entry(&self, m: u64, n: u64) -> Scalar {
        let one = Scalar::new(1.0, 0.0);
        let zero = Scalar::new(0.0, 0.0);
        match self {
            MatrixMethod::Identity => if m == n { one } else { zero },
            MatrixMethod::SeriesSummation => if n <= m { one } else { zero },
            MatrixMethod::Cesaro => if n <= m { Scalar::new(1.0 / (m as f64 + 1.0), 0.0) } else { zero },
            MatrixMethod::Custom { row, support, .. } => match support {
                RowSupport::Diagonal if n != m => zero,
                RowSupport::LowerTriangular if n > m => zero,
                _ => row(m, n),
            },
        }
    }

    pub fn support(&self) -> RowSupport {
        match self {
            MatrixMethod::Identity => RowSupport::Diagonal,
            MatrixMethod::SeriesSummation | MatrixMethod::Cesaro => RowSupport::LowerTriangular,
            MatrixMethod::Custom { support, .. } => *support,
        }
    }

    /// `(first, last)` nonzero column of row `m`; `last = None` for
    /// unbounded rows.
    pub fn row_range(&self, m: u64) -> (u64, Option<u64>) {
        match self.support() {
            RowSupport::Diagonal => (m, Some(m)),
            RowSupport::LowerTriangular => (0, Some(m)),
            RowSupport::Infinite => (0, None),
        }
    }

    /// `Σ_{n ≤ n_max} |a_{m,n}|` and `Σ_{n ≤ n_max} a_{m,n}`.
    ///
    /// Built-in rows use closed forms, so the Cesàro row sum is exactly 1.
    pub fn row_sums(&self, m: u64, n_max: u64) -> RowSums {
        let (first, last) = self.row_range(m);
        let n_last = last.map_or(n_max, |l| l.min(n_max));
        let complete = last.is_some_and(|l| l <= n_max);
        let count = if n_last >= first { (n_last - first + 1) as f64 } else { 0.0 };
        let closed = |abs: f64| RowSums {
            abs_sum: abs,
            sum: Scalar::new(abs, 0.0),
            n_last,
            complete,
        };
        match self {
            MatrixMethod::Identity => closed(if m <= n_max { 1.0 } else { 0.0 }),
            MatrixMethod::SeriesSummation => closed(count),
            MatrixMethod::Cesaro => closed(count / (m as f64 + 1.0)),
            MatrixMethod::Custom { .. } => {
                let mut abs = Neumaier::default();
                let mut re = Neumaier::default();
                let mut im = Neumaier::default();
                for n in first..=n_last {
                    let a = self.entry(m, n);
                    abs.add(a.norm());
                    re.add(a.re);
                    im.add(a.im);
                }
                RowSums {
                    abs_sum: abs.total(),
                    sum: Scalar::new(re.total(), im.total()),
                    n_last,
                    complete,
                }
            }
        }
    }
}

#[derive(Clone)]
pub enum SeqToFuncMethod {
    /// `a_n(r) = (1 − r) r^n`.
    Abel,
    Custom { label: String, coeff: CoeffFn },
}

impl fmt::Debug for SeqToFuncMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl SeqToFuncMethod {
    pub fn custom<F>(label: impl Into<String>, coeff: F) -> Self
    where
        F: Fn(u64, f64) -> Scalar + Send + Sync + 'static,
    {
        SeqToFuncMethod::Custom {
            label: label.into(),
            coeff: Arc::new(coeff),
        }
    }

    pub fn label(&self) -> String {
        match self {
            SeqToFuncMethod::Abel => "abel".into(),
            SeqToFuncMethod::Custom { label, .. } => label.clone(),
        }
    }

    pub fn coeff(&self, n: u64, r: f64) -> Scalar {
        match self {
            SeqToFuncMethod::Abel => Scalar::new((1.0 - r) * r.powf(n as f64), 0.0),
            SeqToFuncMethod::Custom { coeff, .. } => coeff(n, r),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Counting,
    Lebesgue,
}

/// `A(v)(r) = ∫_E a(r, t) v(t) dμ(t)`.
#[derive(Clone)]
pub struct KernelMethod {
    label: String,
    kernel: KernelFn,
    e: IndexDomain,
    f: IndexDomain,
    measure: Measure,
    support: SupportFn,
    substitution: Substitution,
    /// Rows with finite support under counting measure.
    finite_rows: bool,
}

impl fmt::Debug for KernelMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelMethod")
            .field("label", &self.label)
            .field("e", &self.e)
            .field("f", &self.f)
            .field("measure", &self.measure)
            .finish()
    }
}

impl KernelMethod {
    /// A general kernel. `support(r)` must contain every `t` where
    /// `a(r, t) ≠ 0`; it is clipped to `E`.
    pub fn new<K, S>(label: impl Into<String>, e: IndexDomain, f: IndexDomain, measure: Measure, kernel: K, support: S) -> Result<Self>
    where
        K: Fn(f64, f64) -> Scalar + Send + Sync + 'static,
        S: Fn(f64) -> (f64, f64) + Send + Sync + 'static,
    {
        match (measure, e.is_discrete()) {
            (Measure::Counting, false) => return Err(Error::usage("counting measure needs E = ℕ")),
            (Measure::Lebesgue, true) => return Err(Error::usage("Lebesgue measure needs an interval E")),
            _ => {}
        }
        Ok(KernelMethod {
            label: label.into(),
            kernel: Arc::new(kernel),
            e,
            f,
            measure,
            support: Arc::new(support),
            substitution: Substitution::None,
            finite_rows: false,
        })
    }

    /// `a(r, t) = −1/log(1−r) · 1/(1−t)` on `[0, r)`, `E = F = [0, 1)`.
    pub fn logarithmic() -> Self {
        let unit = IndexDomain::unit_interval();
        let mut k = Self::new(
            "logarithmic",
            unit,
            unit,
            Measure::Lebesgue,
            |r, t| {
                if (0.0..r).contains(&t) {
                    Scalar::new(-1.0 / (-r).ln_1p() / (1.0 - t), 0.0)
                } else {
                    Scalar::new(0.0, 0.0)
                }
            },
            |r| (0.0, r),
        )
        .expect("valid domains");
        k.substitution = Substitution::LogBoundary;
        k
    }

    /// The Abel coefficients `(1 − r) r^n` as a kernel over counting measure.
    pub fn abel() -> Self {
        Self::new(
            "abel_kernel",
            IndexDomain::DiscreteNat,
            IndexDomain::unit_interval(),
            Measure::Counting,
            |r, n| Scalar::new((1.0 - r) * r.powf(n), 0.0),
            |_| (0.0, f64::INFINITY),
        )
        .expect("valid domains")
    }

    /// `a(r, t) = χ_{[r, r+1]}(t)` on `E = F = [0, ∞)`.
    pub fn translation() -> Self {
        let line = IndexDomain::half_line();
        Self::new(
            "translation",
            line,
            line,
            Measure::Lebesgue,
            |r, t| if (r..=r + 1.0).contains(&t) { Scalar::new(1.0, 0.0) } else { Scalar::new(0.0, 0.0) },
            |r| (r, r + 1.0),
        )
        .expect("valid domains")
    }

    /// A matrix method as a kernel over `(ℕ, counting)`: `a(m, n) = a_{m,n}`.
    pub fn from_matrix(matrix: MatrixMethod) -> Self {
        let label = format!("{}_kernel", matrix.label());
        let finite = matrix.support() != RowSupport::Infinite;
        let m2 = matrix.clone();
        let mut k = Self::new(
            label,
            IndexDomain::DiscreteNat,
            IndexDomain::DiscreteNat,
            Measure::Counting,
            move |r, n| matrix.entry(r as u64, n as u64),
            move |r| {
                let (a, b) = m2.row_range(r as u64);
                (a as f64, b.map_or(f64::INFINITY, |b| b as f64))
            },
        )
        .expect("valid domains");
        k.finite_rows = finite;
        k
    }

    /// `c · a(r, t)`.
    pub fn scaled(&self, c: Scalar) -> Self {
        let inner = self.kernel.clone();
        KernelMethod {
            label: format!("{}*{}", format_scalar(c), self.label),
            kernel: Arc::new(move |r, t| c * inner(r, t)),
            ..self.clone()
        }
    }

    pub fn with_substitution(mut self, s: Substitution) -> Self {
        self.substitution = s;
        self
    }

    pub fn with_finite_rows(mut self, finite: bool) -> Self {
        self.finite_rows = finite;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn e(&self) -> IndexDomain {
        self.e
    }

    pub fn f(&self) -> IndexDomain {
        self.f
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn substitution(&self) -> Substitution {
        self.substitution
    }

    pub fn kernel(&self, r: f64, t: f64) -> Scalar {
        (self.kernel)(r, t)
    }

    /// Support of `t ↦ a(r, t)` intersected with `E` and with `[0, cap]`.
    pub fn support_within(&self, r: f64, cap: f64) -> (f64, f64) {
        let (lo, hi) = (self.support)(r);
        let e_right = match self.e {
            IndexDomain::DiscreteNat => f64::INFINITY,
            IndexDomain::HalfOpen { right } => right,
        };
        (lo.max(0.0), hi.min(e_right).min(cap))
    }

    pub(crate) fn quad_config(&self, quad: &QuadratureConfig) -> QuadratureConfig {
        let mut q = *quad;
        if q.substitution == Substitution::None {
            q.substitution = self.substitution;
        }
        q
    }

    /// `∫_{E ∩ [0, cap]} g(a(r, t)) dμ(t)` for scalar `g`; used by the
    /// regularity checks. Returns the value and whether an unbounded row was
    /// truncated rather than covered.
    pub fn integrate_kernel<G>(&self, r: f64, cap: f64, g: G, cfg: &EvalConfig) -> Result<Scalar>
    where
        G: Fn(Scalar) -> Scalar + Sync,
    {
        let (lo, hi) = self.support_within(r, cap);
        if hi < lo {
            return Ok(Scalar::new(0.0, 0.0));
        }
        match self.measure {
            Measure::Lebesgue => {
                if !hi.is_finite() {
                    return Err(Error::usage(format!("kernel `{}` has unbounded support at r = {r}", self.label)));
                }
                let q = self.quad_config(&cfg.quad);
                let res = adaptive_quadrature(
                    crate::vspace::Space::scalar(),
                    |t, out| out[0] = g(self.kernel(r, t)),
                    lo,
                    hi,
                    &q,
                )?;
                Ok(res.value.coords()[0])
            }
            Measure::Counting => {
                let first = lo.ceil() as u64;
                let last = if hi.is_finite() { Some(hi.floor() as u64) } else { None };
                let ones = SequenceSource::constant(Vector::scalar(Scalar::new(1.0, 0.0)));
                let weights = |n: u64| g(self.kernel(r, n as f64));
                let cert = if last.is_some() { Cert::Finite } else { Cert::Ratio };
                let mut w = ClosureWeights(weights);
                let out = stream_sum(&ones, first, last, &mut w, cert, &cfg.trunc, r, None)?;
                Ok(out[0])
            }
        }
    }
}

fn format_scalar(c: Scalar) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else {
        format!("({}+{}i)", c.re, c.im)
    }
}

/// A summability method.
#[derive(Debug, Clone)]
pub enum Method {
    Matrix(MatrixMethod),
    SeqToFunc(SeqToFuncMethod),
    Kernel(KernelMethod),
}

impl From<MatrixMethod> for Method {
    fn from(m: MatrixMethod) -> Self {
        Method::Matrix(m)
    }
}

impl From<SeqToFuncMethod> for Method {
    fn from(m: SeqToFuncMethod) -> Self {
        Method::SeqToFunc(m)
    }
}

impl From<KernelMethod> for Method {
    fn from(m: KernelMethod) -> Self {
        Method::Kernel(m)
    }
}

impl Method {
    pub fn cesaro() -> Self {
        Method::Matrix(MatrixMethod::Cesaro)
    }

    pub fn abel() -> Self {
        Method::SeqToFunc(SeqToFuncMethod::Abel)
    }

    pub fn label(&self) -> String {
        match self {
            Method::Matrix(m) => m.label(),
            Method::SeqToFunc(s) => s.label(),
            Method::Kernel(k) => k.label().to_string(),
        }
    }

    /// The index domain `E` of inputs.
    pub fn input_domain(&self) -> IndexDomain {
        match self {
            Method::Matrix(_) | Method::SeqToFunc(_) => IndexDomain::DiscreteNat,
            Method::Kernel(k) => k.e(),
        }
    }

    /// The parameter domain `F` of outputs.
    pub fn output_domain(&self) -> IndexDomain {
        match self {
            Method::Matrix(_) => IndexDomain::DiscreteNat,
            Method::SeqToFunc(_) => IndexDomain::unit_interval(),
            Method::Kernel(k) => k.f(),
        }
    }

    /// `A(v)(p)` at one parameter.
    pub fn transform(&self, v: &Source, p: f64, cfg: &EvalConfig) -> Result<Vector> {
        match (self, v) {
            (Method::Matrix(m), Source::Sequence(s)) => {
                if p < 0.0 || p.fract() != 0.0 {
                    return Err(Error::usage(format!("matrix row index must be a natural number, got {p}")));
                }
                matrix_transform(m, s, p as u64, &cfg.trunc)
            }
            (Method::SeqToFunc(m), Source::Sequence(s)) => seq2func_transform(m, s, p, &cfg.trunc),
            (Method::Kernel(k), _) => kernel_transform(k, v, p, cfg),
            (_, Source::Function(_)) => Err(Error::SourceMismatch(format!(
                "method `{}` acts on sequences, got a function",
                self.label()
            ))),
        }
    }
}

/// Weight generator for streamed sums.
trait Weights {
    fn block(&mut self, start: u64, out: &mut [Scalar]);
}

struct ClosureWeights<F>(F);

impl<F: FnMut(u64) -> Scalar> Weights for ClosureWeights<F> {
    fn block(&mut self, start: u64, out: &mut [Scalar]) {
        for (i, w) in out.iter_mut().enumerate() {
            *w = (self.0)(start + i as u64);
        }
    }
}

/// `c · r^n`, re-anchored with `powf` at every block start.
struct GeometricWeights {
    c: f64,
    r: f64,
}

impl Weights for GeometricWeights {
    fn block(&mut self, start: u64, out: &mut [Scalar]) {
        let mut p = self.c * self.r.powf(start as f64);
        for w in out.iter_mut() {
            *w = Scalar::new(p, 0.0);
            p *= self.r;
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Cert {
    /// Row ends at a known index.
    Finite,
    /// Weights are `c r^n` with `Σ_{n≥N} weights = r^N`; the tail is at most
    /// `r^N · sup ‖v_n‖` over the most recent block.
    Geometric(f64),
    /// Generic: the decay ratio of `|w_n|` over the last block is used as a
    /// geometric model of the remaining weights.
    Ratio,
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

/// `Σ_{n = first}^{last} w_n v_n`, streamed in blocks. With `last = None`
/// the sum stops once the certificate bound drops below `tail_tol`.
#[allow(clippy::too_many_arguments)]
fn stream_sum(
    v: &SequenceSource,
    first: u64,
    last: Option<u64>,
    weights: &mut dyn Weights,
    cert: Cert,
    trunc: &TruncationPolicy,
    param: f64,
    row: Option<u64>,
) -> Result<Vec<Scalar>> {
    let d = v.dim();
    let zero = Scalar::new(0.0, 0.0);
    if let Some(l) = last {
        if l >= first && l - first + 1 > trunc.max_terms {
            return Err(Error::BudgetExceeded {
                needed: l - first + 1,
                max_terms: trunc.max_terms,
            });
        }
    }
    let mut acc_re = vec![Neumaier::default(); d];
    let mut acc_im = vec![Neumaier::default(); d];
    let mut block_sum = vec![zero; d];
    let mut terms = vec![zero; BLOCK * d];
    let mut w = vec![zero; BLOCK];
    let mut cursor = v.cursor(first);
    let mut n = first;
    let mut bound = f64::INFINITY;
    loop {
        let remaining = match last {
            Some(l) if n > l => break,
            Some(l) => (l - n + 1).min(BLOCK as u64) as usize,
            None => BLOCK,
        };
        if last.is_none() && n - first >= trunc.max_terms {
            let total: Vec<Scalar> = (0..d)
                .map(|j| Scalar::new(acc_re[j].total(), acc_im[j].total()))
                .collect();
            return Err(match row {
                Some(row) => Error::NonSummableRow {
                    row,
                    terms: n - first,
                    bound,
                    partial: Box::new(Vector::from_parts_unchecked(v.space(), total)),
                },
                None => Error::NonSummable {
                    param,
                    terms: n - first,
                    bound,
                },
            });
        }
        let terms = &mut terms[..remaining * d];
        let w = &mut w[..remaining];
        cursor.fill(terms);
        weights.block(n, w);
        block_sum.fill(zero);
        let mut sup = 0.0f64;
        let real = w.iter().all(|z| z.im == 0.0);
        for (wi, x) in w.iter().zip(terms.chunks_exact(d)) {
            if real {
                for (b, xi) in block_sum.iter_mut().zip(x) {
                    *b += xi * wi.re;
                }
            } else {
                for (b, xi) in block_sum.iter_mut().zip(x) {
                    *b += wi * xi;
                }
            }
        }
        if !matches!(cert, Cert::Finite) {
            sup = terms.chunks_exact(d).map(norm_upper_bound).fold(0.0, f64::max);
        }
        for j in 0..d {
            acc_re[j].add(block_sum[j].re);
            acc_im[j].add(block_sum[j].im);
        }
        n += remaining as u64;
        if !sup.is_finite() || !block_sum.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite("streamed sum"));
        }
        bound = match cert {
            Cert::Finite => continue,
            Cert::Geometric(r) => r.powf(n as f64) * sup,
            Cert::Ratio => {
                let w_last = w[remaining - 1].norm();
                let w_first = w[0].norm();
                if w_last == 0.0 {
                    0.0
                } else if remaining < 2 || w_first == 0.0 {
                    f64::INFINITY
                } else {
                    let q = (w_last / w_first).powf(1.0 / (remaining - 1) as f64);
                    if q < 1.0 {
                        w_last * q / (1.0 - q) * sup
                    } else {
                        f64::INFINITY
                    }
                }
            }
        };
        if bound <= trunc.tail_tol {
            break;
        }
    }
    Ok((0..d)
        .map(|j| Scalar::new(acc_re[j].total(), acc_im[j].total()))
        .collect())
}

/// `Σ_n a_{m,n} v_n`.
pub fn matrix_transform(spec: &MatrixMethod, v: &SequenceSource, m: u64, trunc: &TruncationPolicy) -> Result<Vector> {
    trunc.validate()?;
    let space = v.space();
    let one = Scalar::new(1.0, 0.0);
    let mut ones = ClosureWeights(|_| one);
    let coords = match spec {
        MatrixMethod::Identity => {
            let mut out = vec![Scalar::new(0.0, 0.0); v.dim()];
            v.term_into(m, &mut out);
            out
        }
        MatrixMethod::SeriesSummation | MatrixMethod::Cesaro => {
            let mut s = match v.stable_from() {
                Some(n0) if n0 <= m => {
                    let mut s = if n0 > 0 {
                        stream_sum(v, 0, Some(n0 - 1), &mut ones, Cert::Finite, trunc, m as f64, Some(m))?
                    } else {
                        vec![Scalar::new(0.0, 0.0); v.dim()]
                    };
                    let mut tail = vec![Scalar::new(0.0, 0.0); v.dim()];
                    v.term_into(n0, &mut tail);
                    let count = (m - n0 + 1) as f64;
                    for (a, t) in s.iter_mut().zip(&tail) {
                        *a += t * count;
                    }
                    s
                }
                _ => stream_sum(v, 0, Some(m), &mut ones, Cert::Finite, trunc, m as f64, Some(m))?,
            };
            if matches!(spec, MatrixMethod::Cesaro) {
                let k = m as f64 + 1.0;
                for z in s.iter_mut() {
                    *z /= k;
                }
            }
            s
        }
        MatrixMethod::Custom { .. } => {
            let (first, last) = spec.row_range(m);
            let mut w = ClosureWeights(|n| spec.entry(m, n));
            let cert = if last.is_some() { Cert::Finite } else { Cert::Ratio };
            stream_sum(v, first, last, &mut w, cert, trunc, m as f64, Some(m))?
        }
    };
    finite_vector(space, coords, "matrix transform")
}

/// `Σ_n a_n(r) v_n` for `0 ≤ r < 1`.
pub fn seq2func_transform(spec: &SeqToFuncMethod, v: &SequenceSource, r: f64, trunc: &TruncationPolicy) -> Result<Vector> {
    trunc.validate()?;
    if !(0.0..1.0).contains(&r) {
        return Err(Error::usage(format!("parameter must lie in [0, 1), got {r}")));
    }
    let coords = match spec {
        SeqToFuncMethod::Abel => match v.stable_from() {
            Some(n0) => {
                let mut s = if n0 > 0 {
                    let mut w = GeometricWeights { c: 1.0 - r, r };
                    stream_sum(v, 0, Some(n0 - 1), &mut w, Cert::Finite, trunc, r, None)?
                } else {
                    vec![Scalar::new(0.0, 0.0); v.dim()]
                };
                let mut tail = vec![Scalar::new(0.0, 0.0); v.dim()];
                v.term_into(n0, &mut tail);
                let rn = r.powf(n0 as f64);
                for (a, t) in s.iter_mut().zip(&tail) {
                    *a += t * rn;
                }
                s
            }
            None => {
                let mut w = GeometricWeights { c: 1.0 - r, r };
                stream_sum(v, 0, None, &mut w, Cert::Geometric(r), trunc, r, None)?
            }
        },
        SeqToFuncMethod::Custom { coeff, .. } => {
            let mut w = ClosureWeights(|n| coeff(n, r));
            stream_sum(v, 0, None, &mut w, Cert::Ratio, trunc, r, None)?
        }
    };
    finite_vector(v.space(), coords, "sequence-to-function transform")
}

/// `∫_E a(r, t) v(t) dμ(t)`.
pub fn kernel_transform(spec: &KernelMethod, v: &Source, r: f64, cfg: &EvalConfig) -> Result<Vector> {
    cfg.validate()?;
    if !spec.f().contains(r) {
        return Err(Error::usage(format!("parameter {r} outside the parameter domain of `{}`", spec.label())));
    }
    let (lo, hi) = spec.support_within(r, f64::INFINITY);
    match (spec.measure(), v) {
        (Measure::Counting, Source::Sequence(s)) => {
            if hi < lo {
                return Ok(s.space().zero());
            }
            let first = lo.ceil() as u64;
            let last = hi.is_finite().then(|| hi.floor() as u64);
            let mut w = ClosureWeights(|n| spec.kernel(r, n as f64));
            let cert = if last.is_some() { Cert::Finite } else { Cert::Ratio };
            let coords = stream_sum(s, first, last, &mut w, cert, &cfg.trunc, r, None)?;
            finite_vector(s.space(), coords, "kernel transform")
        }
        (Measure::Lebesgue, Source::Function(f)) => lebesgue_transform(spec, f, r, lo, hi, cfg),
        (Measure::Counting, Source::Function(_)) => Err(Error::SourceMismatch(format!(
            "kernel `{}` sums over ℕ and needs a sequence",
            spec.label()
        ))),
        (Measure::Lebesgue, Source::Sequence(_)) => Err(Error::SourceMismatch(format!(
            "kernel `{}` integrates over an interval and needs a function",
            spec.label()
        ))),
    }
}

fn lebesgue_transform(spec: &KernelMethod, f: &FunctionSource, r: f64, lo: f64, hi: f64, cfg: &EvalConfig) -> Result<Vector> {
    if hi <= lo {
        return Ok(f.space().zero());
    }
    if !hi.is_finite() {
        return Err(Error::usage(format!("kernel `{}` has unbounded support at r = {r}", spec.label())));
    }
    let q = spec.quad_config(&cfg.quad);
    let res = adaptive_quadrature(
        f.space(),
        |t, out| {
            f.value_into(t, out);
            let a = spec.kernel(r, t);
            for z in out.iter_mut() {
                *z *= a;
            }
        },
        lo,
        hi,
        &q,
    )?;
    Ok(res.value)
}

fn finite_vector(space: crate::vspace::Space, coords: Vec<Scalar>, what: &'static str) -> Result<Vector> {
    Vector::new(space, coords).map_err(|e| match e {
        Error::NonFinite(_) => Error::NonFinite(what),
        other => other,
    })
}

/// Method values along the parameter grid and the resulting limit estimate.
#[derive(Debug, Clone)]
pub struct SummabilityRun {
    pub grid: Vec<f64>,
    pub values: Vec<std::result::Result<Vector, Error>>,
    pub estimate: ConvergenceEstimate,
}

impl SummabilityRun {
    pub fn failures(&self) -> usize {
        self.values.iter().filter(|v| v.is_err()).count()
    }
}

/// Grid on which [`summability_limit`] samples a method.
///
/// On `F = ℕ` each grid point `2^k` is paired with `2^k + 1`, so period-two
/// oscillation is not hidden by sampling even indices only.
pub fn sampling_grid(f: IndexDomain, depth: u32) -> Result<Vec<f64>> {
    let base = parameter_grid(f, depth)?;
    Ok(if f.is_discrete() {
        base.into_iter().flat_map(|m| [m, m + 1.0]).collect()
    } else {
        base
    })
}

/// The operational `lim_A`: evaluates the method on the sampling grid and
/// runs the limit estimator. Grid points where the transform fails are
/// recorded as undefined.
pub fn summability_limit(method: &Method, v: &Source, depth: u32, cfg: &EvalConfig) -> Result<SummabilityRun> {
    cfg.validate()?;
    let f = method.output_domain();
    let grid = sampling_grid(f, depth)?;
    let values: Vec<_> = grid.par_iter().map(|&p| method.transform(v, p, cfg)).collect();
    if let Some(Err(e @ Error::SourceMismatch(_))) = values.first() {
        return Err(e.clone());
    }
    let mut limit = cfg.limit;
    if f.is_discrete() {
        limit.window *= 2;
    }
    let refs: Vec<Option<&Vector>> = values.iter().map(|v| v.as_ref().ok()).collect();
    let estimate = estimate_partial(&refs, &limit)?;
    Ok(SummabilityRun { grid, values, estimate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::Status;
    use crate::vspace::{NormKind, Space};

    fn c(x: f64) -> Scalar {
        Scalar::new(x, 0.0)
    }

    fn alt() -> SequenceSource {
        SequenceSource::scalar_fn(|n| c(if n % 2 == 0 { 1.0 } else { -1.0 }))
    }

    fn first(v: &Vector) -> f64 {
        v.coords()[0].re
    }

    #[test]
    fn matrix_examples() {
        let t = TruncationPolicy::default();
        assert_eq!(first(&matrix_transform(&MatrixMethod::Cesaro, &alt(), 3, &t).unwrap()), 0.0);
        let v = SequenceSource::scalar_fn(|n| c(n as f64 * 10.0));
        assert_eq!(first(&matrix_transform(&MatrixMethod::Identity, &v, 5, &t).unwrap()), 50.0);
        let g = SequenceSource::scalar_fn(|n| c(0.5f64.powi(n as i32)));
        assert_eq!(first(&matrix_transform(&MatrixMethod::SeriesSummation, &g, 3, &t).unwrap()), 15.0 / 8.0);
    }

    #[test]
    fn abel_examples() {
        let t = TruncationPolicy::default();
        let ones = SequenceSource::scalar_fn(|_| c(1.0));
        let a = first(&seq2func_transform(&SeqToFuncMethod::Abel, &ones, 0.5, &t).unwrap());
        assert!((a - 1.0).abs() < 1e-14);
        let a = first(&seq2func_transform(&SeqToFuncMethod::Abel, &alt(), 0.5, &t).unwrap());
        assert!((a - 1.0 / 3.0).abs() < 1e-14);
        let grow = SequenceSource::scalar_fn(|n| c(if n % 2 == 0 { 1.0 } else { -1.0 } * (n as f64 + 1.0)));
        let a = first(&seq2func_transform(&SeqToFuncMethod::Abel, &grow, 0.5, &t).unwrap());
        assert!((a - 2.0 / 9.0).abs() < 1e-13);
    }

    #[test]
    fn abel_budget_is_enforced() {
        let t = TruncationPolicy {
            tail_tol: 1e-14,
            max_terms: 100,
        };
        let ones = SequenceSource::scalar_fn(|_| c(1.0));
        let err = seq2func_transform(&SeqToFuncMethod::Abel, &ones, 0.999, &t).unwrap_err();
        assert!(matches!(err, Error::NonSummable { .. }));
    }

    #[test]
    fn infinite_custom_row_reports_partial_sum() {
        let row = MatrixMethod::custom("harmonic", RowSupport::Infinite, |_, n| c(1.0 / (n as f64 + 1.0)));
        let t = TruncationPolicy {
            tail_tol: 1e-14,
            max_terms: 4096,
        };
        let ones = SequenceSource::scalar_fn(|_| c(1.0));
        match matrix_transform(&row, &ones, 0, &t).unwrap_err() {
            Error::NonSummableRow { row: 0, partial, .. } => assert!(first(&partial) > 8.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn logarithmic_examples() {
        let cfg = EvalConfig::default();
        let k = Method::Kernel(KernelMethod::logarithmic());
        let one = Source::Function(FunctionSource::scalar_fn(|_| c(1.0)));
        for r in [0.1, 0.5, 0.999] {
            assert!((first(&k.transform(&one, r, &cfg).unwrap()) - 1.0).abs() < 1e-12);
        }
        let r = 1.0 - (-1f64).exp();
        let lin = Source::Function(FunctionSource::scalar_fn(|t| c(1.0 - t)));
        assert!((first(&k.transform(&lin, r, &cfg).unwrap()) - r).abs() < 1e-10);
        let sp = Space::new(3, NormKind::L2).unwrap();
        let x0 = Vector::from_reals(sp, &[2.0, -1.0, 0.5]).unwrap();
        let val = k.transform(&Source::Function(FunctionSource::constant(x0.clone())), 0.7, &cfg).unwrap();
        assert!(val.distance(&x0) < 1e-12);
    }

    #[test]
    fn wrong_source_kind_is_rejected() {
        let f = Source::Function(FunctionSource::scalar_fn(|_| c(1.0)));
        assert!(matches!(
            Method::cesaro().transform(&f, 3.0, &EvalConfig::default()),
            Err(Error::SourceMismatch(_))
        ));
    }

    #[test]
    fn limits() {
        let cfg = EvalConfig::with_tol(1e-3);
        let series = Source::Sequence(SequenceSource::partial_sums(alt()));
        let run = summability_limit(&Method::cesaro(), &series, 14, &cfg).unwrap();
        assert_eq!(run.estimate.status, Status::Converged);
        assert!((first(run.estimate.value.as_ref().unwrap()) - 0.5).abs() < 1e-3);

        let conv = Source::Sequence(SequenceSource::scalar_fn(|n| c(1.0 + 0.5f64.powi(n as i32))));
        // Near r = 1 − 2^{-20} the geometric tail needs ~3.4e7 terms.
        let mut deep = EvalConfig::with_tol(1e-4);
        deep.trunc.max_terms = 100_000_000;
        let run = summability_limit(&Method::abel(), &conv, 20, &deep).unwrap();
        assert_eq!(run.estimate.status, Status::Converged);
        assert!((first(run.estimate.value.as_ref().unwrap()) - 1.0).abs() < 1e-4);

        let ones = Source::Sequence(SequenceSource::scalar_fn(|_| c(1.0)));
        let run = summability_limit(&Method::Matrix(MatrixMethod::SeriesSummation), &ones, 14, &cfg).unwrap();
        assert_eq!(run.estimate.status, Status::Diverged);
    }

    #[test]
    fn stable_tail_matches_streamed_sum() {
        let sp = Space::new(2, NormKind::L1).unwrap();
        let mk = || {
            SequenceSource::from_fn(sp, |n, out| {
                let k = n.min(3) as f64;
                out[0] = c(k);
                out[1] = Scalar::new(0.0, -k);
            })
        };
        let plain = Source::Sequence(mk());
        let stable = Source::Sequence(mk().with_stable_from(3));
        let cfg = EvalConfig::default();
        for m in [Method::cesaro(), Method::abel(), Method::Matrix(MatrixMethod::SeriesSummation)] {
            for p in [0.5f64, 0.875, 9.0, 64.0] {
                let p = if m.output_domain().is_discrete() { p.ceil() } else { p.min(0.99) };
                let a = m.transform(&plain, p, &cfg).unwrap();
                let b = m.transform(&stable, p, &cfg).unwrap();
                assert!(a.distance(&b) <= 1e-12 * (1.0 + a.norm()), "{} at {p}", m.label());
            }
        }
    }
}
