//! JSON experiment configs and their compilation into runnable plans.
//!
//! Parsing rejects unknown keys; compilation parses every expression and
//! builds every method, source and function up front, so a config that
//! compiles can only fail at run time through numerical errors.

use std::collections::HashSet;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use summability::holo::{BhfdSpace, ChainStep, DecayClass, TaylorFunction};
use summability::inclusion::{scalar_battery, OperatorFamily, TransferConfig};
use summability::methods::{Measure, RowSupport};
use summability::regularity::KernelCheckConfig;
use summability::{
    EvalConfig, FunctionSource, IndexDomain, KernelMethod, LinearFunctional, MatrixMethod, Method, NormKind,
    Scalar, SeqToFuncMethod, SequenceSource, Source, Space, Substitution, Vector,
};
use thiserror::Error;

use crate::expr::{Expr, ExprError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("experiment `{id}`: {msg}")]
    Invalid { id: String, msg: String },
    #[error("{0}")]
    Global(String),
}

fn invalid(id: &str, msg: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        id: id.to_string(),
        msg: msg.to_string(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub description: Option<String>,
    pub experiments: Vec<Experiment>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Experiment {
    CheckRegularity(RegularitySpec),
    Sum(SumSpec),
    Inclusion(InclusionSpec),
    Transfer(TransferSpec),
    WeakInclusion(WeakSpec),
    Taylor(TaylorSpec),
}

impl Experiment {
    pub fn id(&self) -> &str {
        match self {
            Experiment::CheckRegularity(s) => &s.id,
            Experiment::Sum(s) => &s.id,
            Experiment::Inclusion(s) => &s.id,
            Experiment::Transfer(s) => &s.id,
            Experiment::WeakInclusion(s) => &s.id,
            Experiment::Taylor(s) => &s.id,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularitySpec {
    pub id: String,
    pub method: MethodSpec,
    /// Matrix methods: rows `m = 2^1, …, 2^m_depth`.
    #[serde(default = "default_m_depth")]
    pub m_depth: u32,
    /// Matrix methods: columns summed per row; defaults to `2^(m_depth+1)`.
    #[serde(default)]
    pub n_max: Option<u64>,
    #[serde(default)]
    pub r_depth: Option<u32>,
    #[serde(default)]
    pub exhaust_depth: Option<u32>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub eval: EvalConfig,
}

fn default_m_depth() -> u32 {
    14
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SumSpec {
    pub id: String,
    pub method: MethodSpec,
    pub sources: Vec<SourceSpec>,
    pub depth: u32,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub eval: EvalConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InclusionSpec {
    pub id: String,
    pub a: MethodSpec,
    pub b: MethodSpec,
    pub sources: Vec<SourceSpec>,
    pub depth: u32,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub eval: EvalConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferSpec {
    pub id: String,
    pub a: MethodSpec,
    pub b: MethodSpec,
    pub family: FamilySpec,
    pub dim: usize,
    #[serde(default = "default_norm")]
    pub norm: NormKind,
    pub probes: Vec<Vec<ComplexValue>>,
    #[serde(default)]
    pub depth: Option<u32>,
    #[serde(default)]
    pub regularity_depth: Option<u32>,
    #[serde(default)]
    pub battery_depth: Option<u32>,
    #[serde(default)]
    pub battery_tol: Option<f64>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub eval: EvalConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeakSpec {
    pub id: String,
    pub a: MethodSpec,
    pub b: MethodSpec,
    pub sources: Vec<SourceSpec>,
    pub functionals: FunctionalsSpec,
    pub depth: u32,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub eval: EvalConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaylorSpec {
    pub id: String,
    pub function: FunctionSpec,
    pub space: SpaceSpec,
    pub chains: Vec<Vec<ChainStep>>,
    pub depth: u32,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub eval: EvalConfig,
}

fn default_norm() -> NormKind {
    NormKind::L2
}

/// A complex number written as `x` or `[re, im]`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexValue {
    pub fn value(self) -> Scalar {
        match self {
            ComplexValue::Real(x) => Complex64::new(x, 0.0),
            ComplexValue::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum MethodSpec {
    Builtin(String),
    Custom(CustomMethod),
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CustomMethod {
    /// Row entries `a(m, n)`.
    Matrix {
        #[serde(default)]
        label: Option<String>,
        row: String,
        support: RowSupport,
    },
    /// Coefficients `a_n(r)` on `r ∈ [0, 1)`.
    SeqToFunc {
        #[serde(default)]
        label: Option<String>,
        coeff: String,
    },
    /// Kernel `a(r, t)` with support `[lo(r), hi(r)]`.
    Kernel {
        #[serde(default)]
        label: Option<String>,
        kernel: String,
        e: DomainSpec,
        f: DomainSpec,
        measure: Measure,
        #[serde(default)]
        support: Option<[String; 2]>,
        #[serde(default)]
        substitution: Substitution,
    },
    /// `c · a(r, t)` for a kernel method.
    Scaled { method: Box<MethodSpec>, factor: ComplexValue },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Nat,
    UnitInterval,
    HalfLine,
    HalfOpen(f64),
}

impl DomainSpec {
    fn build(self) -> Result<IndexDomain, String> {
        Ok(match self {
            DomainSpec::Nat => IndexDomain::DiscreteNat,
            DomainSpec::UnitInterval => IndexDomain::unit_interval(),
            DomainSpec::HalfLine => IndexDomain::half_line(),
            DomainSpec::HalfOpen(r) => IndexDomain::half_open(r).map_err(|e| e.to_string())?,
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    /// Coordinates given by expressions in `n`.
    Sequence {
        terms: Vec<String>,
        #[serde(default = "default_norm")]
        norm: NormKind,
        /// Use the partial sums of the sequence (a series).
        #[serde(default)]
        partial_sums: bool,
        #[serde(default)]
        stable_from: Option<u64>,
        #[serde(default)]
        label: Option<String>,
    },
    /// Coordinates given by expressions in `t`.
    Function {
        values: Vec<String>,
        #[serde(default = "default_norm")]
        norm: NormKind,
        #[serde(default)]
        label: Option<String>,
    },
    Constant {
        value: Vec<ComplexValue>,
        #[serde(default = "default_norm")]
        norm: NormKind,
    },
    /// `L + ρ^n u`.
    Geometric {
        limit: Vec<ComplexValue>,
        rho: ComplexValue,
        u: Vec<ComplexValue>,
        #[serde(default = "default_norm")]
        norm: NormKind,
    },
    /// `count` sequences `L + ρ^n u` with seeded random `L, u` in the unit
    /// box and `|ρ| ≤ rho_max`.
    RandomGeometric {
        count: usize,
        dim: usize,
        seed: u64,
        rho_max: f64,
        #[serde(default = "default_norm")]
        norm: NormKind,
    },
    /// The scalar test battery for inputs indexed by the given domain.
    Battery(DomainSpec),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum FamilySpec {
    Named(String),
    OscillatingProjection { oscillating_projection: usize },
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum FunctionalsSpec {
    Named(String),
    Weights(Vec<Vec<ComplexValue>>),
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Polynomial(Vec<ComplexValue>),
    Geometric { c: ComplexValue, rho: f64 },
    Power { c: ComplexValue, alpha: f64 },
    Monomial(u64),
    /// Coefficients from an expression in `k` with a declared decay class.
    Coefficients { expr: String, decay: DecayClass },
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum SpaceSpec {
    Named(String),
    DiskGrid { disk_grid: usize },
}

// ---------------------------------------------------------------------------
// Compiled plans

pub enum Plan {
    MatrixRegularity { method: MatrixMethod, m_grid: Vec<u64>, n_max: u64, tol: f64 },
    KernelRegularity { method: KernelMethod, check: KernelCheckConfig, eval: EvalConfig },
    Sum { method: Method, sources: Vec<Source>, depth: u32, eval: EvalConfig },
    Inclusion { a: Method, b: Method, sources: Vec<Source>, depth: u32, eval: EvalConfig },
    Transfer { a: Method, b: Method, family: OperatorFamily, probes: Vec<Vector>, transfer: TransferConfig, eval: EvalConfig },
    WeakInclusion { a: Method, b: Method, sources: Vec<Source>, functionals: Vec<LinearFunctional>, depth: u32, eval: EvalConfig },
    Taylor { function: TaylorFunction, chains: Vec<Vec<ChainStep>>, depth: u32, eval: EvalConfig },
}

pub struct PlannedExperiment {
    pub id: String,
    pub kind: &'static str,
    pub plan: Plan,
}

/// Names accepted wherever a method is expected.
pub const BUILTIN_METHODS: [(&str, &str); 7] = [
    ("identity", "identity matrix"),
    ("series_summation", "lower-triangular ones: partial sums of the input as a series"),
    ("cesaro", "Cesàro means 1/(m+1) on the first m+1 terms"),
    ("abel", "Abel means (1−r) Σ r^n v_n, r → 1⁻"),
    ("abel_kernel", "Abel coefficients as a kernel over counting measure"),
    ("logarithmic", "kernel −1/log(1−r) · 1/(1−t) on [0, r)"),
    ("translation", "indicator kernel of [r, r+1] on [0, ∞)"),
];

pub const BUILTIN_SPACES: [&str; 3] = ["h2", "wiener", "disk_grid"];

fn builtin_method(name: &str) -> Option<Method> {
    Some(match name {
        "identity" => Method::Matrix(MatrixMethod::Identity),
        "series_summation" => Method::Matrix(MatrixMethod::SeriesSummation),
        "cesaro" => Method::cesaro(),
        "abel" => Method::abel(),
        "abel_kernel" => Method::Kernel(KernelMethod::abel()),
        "logarithmic" => Method::Kernel(KernelMethod::logarithmic()),
        "translation" => Method::Kernel(KernelMethod::translation()),
        _ => return None,
    })
}

fn expr(src: &str, vars: &[&str]) -> Result<Expr, String> {
    Expr::parse(src, vars).map_err(|e: ExprError| format!("in `{src}`: {e}"))
}

impl MethodSpec {
    pub fn build(&self) -> Result<Method, String> {
        match self {
            MethodSpec::Builtin(name) => builtin_method(name).ok_or_else(|| {
                let names: Vec<_> = BUILTIN_METHODS.iter().map(|m| m.0).collect();
                format!("unknown method `{name}` (builtins: {})", names.join(", "))
            }),
            MethodSpec::Custom(c) => c.build(),
        }
    }
}

impl CustomMethod {
    fn build(&self) -> Result<Method, String> {
        match self {
            CustomMethod::Matrix { label, row, support } => {
                let e = expr(row, &["m", "n"])?;
                let label = label.clone().unwrap_or_else(|| format!("matrix({row})"));
                Ok(Method::Matrix(MatrixMethod::custom(label, *support, move |m, n| e.eval(&[m as f64, n as f64]))))
            }
            CustomMethod::SeqToFunc { label, coeff } => {
                let e = expr(coeff, &["n", "r"])?;
                let label = label.clone().unwrap_or_else(|| format!("seq_to_func({coeff})"));
                Ok(Method::SeqToFunc(SeqToFuncMethod::custom(label, move |n, r| e.eval(&[n as f64, r]))))
            }
            CustomMethod::Kernel { label, kernel, e, f, measure, support, substitution } => {
                let k = expr(kernel, &["r", "t"])?;
                let (e, f) = (e.build()?, f.build()?);
                let bounds = match support {
                    Some([lo, hi]) => Some((expr(lo, &["r"])?, expr(hi, &["r"])?)),
                    None => None,
                };
                let upper = match e {
                    IndexDomain::DiscreteNat => f64::INFINITY,
                    IndexDomain::HalfOpen { right } => right,
                };
                let label = label.clone().unwrap_or_else(|| format!("kernel({kernel})"));
                let method = KernelMethod::new(
                    label,
                    e,
                    f,
                    *measure,
                    move |r, t| k.eval(&[r, t]),
                    move |r| match &bounds {
                        Some((lo, hi)) => (lo.eval(&[r]).re, hi.eval(&[r]).re),
                        None => (0.0, upper),
                    },
                )
                .map_err(|e| e.to_string())?;
                Ok(Method::Kernel(method.with_substitution(*substitution)))
            }
            CustomMethod::Scaled { method, factor } => match method.build()? {
                Method::Kernel(k) => Ok(Method::Kernel(k.scaled(factor.value()))),
                other => Err(format!("only kernel methods can be scaled, got `{}`", other.label())),
            },
        }
    }
}

fn vector(space: Space, v: &[ComplexValue]) -> Result<Vector, String> {
    Vector::new(space, v.iter().map(|z| z.value()).collect()).map_err(|e| e.to_string())
}

fn space(dim: usize, norm: NormKind) -> Result<Space, String> {
    Space::new(dim, norm).map_err(|e| e.to_string())
}

impl SourceSpec {
    pub fn build(&self) -> Result<Vec<Source>, String> {
        match self {
            SourceSpec::Sequence { terms, norm, partial_sums, stable_from, label } => {
                let exprs = terms.iter().map(|t| expr(t, &["n"])).collect::<Result<Vec<_>, _>>()?;
                let s = space(exprs.len(), *norm)?;
                let mut seq = SequenceSource::from_fn(s, move |n, out| {
                    for (o, e) in out.iter_mut().zip(&exprs) {
                        *o = e.eval(&[n as f64]);
                    }
                })
                .with_label(label.clone().unwrap_or_else(|| terms.join("; ")));
                if let Some(n0) = stable_from {
                    seq = seq.with_stable_from(*n0);
                }
                if *partial_sums {
                    let label = format!("partial_sums({})", seq.label());
                    seq = SequenceSource::partial_sums(seq).with_label(label);
                }
                Ok(vec![seq.into()])
            }
            SourceSpec::Function { values, norm, label } => {
                let exprs = values.iter().map(|t| expr(t, &["t"])).collect::<Result<Vec<_>, _>>()?;
                let s = space(exprs.len(), *norm)?;
                let f = FunctionSource::from_fn(s, move |t, out| {
                    for (o, e) in out.iter_mut().zip(&exprs) {
                        *o = e.eval(&[t]);
                    }
                })
                .with_label(label.clone().unwrap_or_else(|| values.join("; ")));
                Ok(vec![f.into()])
            }
            SourceSpec::Constant { value, norm } => {
                let x = vector(space(value.len(), *norm)?, value)?;
                Ok(vec![SequenceSource::constant(x).into()])
            }
            SourceSpec::Geometric { limit, rho, u, norm } => {
                let s = space(limit.len(), *norm)?;
                let g = SequenceSource::geometric_approach(&vector(s, limit)?, rho.value(), &vector(s, u)?)
                    .map_err(|e| e.to_string())?;
                Ok(vec![g.into()])
            }
            SourceSpec::RandomGeometric { count, dim, seed, rho_max, norm } => {
                if !(0.0..1.0).contains(rho_max) {
                    return Err(format!("rho_max must lie in [0, 1), got {rho_max}"));
                }
                let s = space(*dim, *norm)?;
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut out = Vec::with_capacity(*count);
                for j in 0..*count {
                    let (limit, u, rho) = random_geometric(&mut rng, s, *rho_max);
                    let g = SequenceSource::geometric_approach(&limit, rho, &u)
                        .map_err(|e| e.to_string())?
                        .with_label(format!("random_geometric[{j}]"));
                    out.push(g.into());
                }
                Ok(out)
            }
            SourceSpec::Battery(d) => Ok(scalar_battery(d.build()?)),
        }
    }
}

/// Draws `(L, u, ρ)` with coordinates of `L, u` uniform in the unit box and
/// `ρ` uniform in modulus on `[0, rho_max]` and in argument.
pub fn random_geometric(rng: &mut ChaCha8Rng, s: Space, rho_max: f64) -> (Vector, Vector, Scalar) {
    let draw = |rng: &mut ChaCha8Rng| {
        let c = (0..s.dim()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        Vector::new(s, c).expect("finite")
    };
    let limit = draw(rng);
    let u = draw(rng);
    let rho = Complex64::from_polar(rng.gen_range(0.0..=rho_max), rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI));
    (limit, u, rho)
}

fn sources(specs: &[SourceSpec]) -> Result<Vec<Source>, String> {
    let mut out = Vec::new();
    for s in specs {
        out.extend(s.build()?);
    }
    if out.is_empty() {
        return Err("source list is empty".into());
    }
    Ok(out)
}

impl SpaceSpec {
    fn build(&self) -> Result<BhfdSpace, String> {
        match self {
            SpaceSpec::Named(n) => match n.as_str() {
                "h2" => Ok(BhfdSpace::H2),
                "wiener" => Ok(BhfdSpace::Wiener),
                "disk_grid" => Ok(BhfdSpace::disk_grid()),
                other => Err(format!("unknown space `{other}` (builtins: {})", BUILTIN_SPACES.join(", "))),
            },
            SpaceSpec::DiskGrid { disk_grid } if *disk_grid > 0 => Ok(BhfdSpace::DiskGrid { points: *disk_grid }),
            SpaceSpec::DiskGrid { .. } => Err("disk grid needs at least one point".into()),
        }
    }
}

impl FunctionSpec {
    fn build(&self, space: BhfdSpace) -> Result<TaylorFunction, String> {
        let f = match self {
            FunctionSpec::Polynomial(c) => TaylorFunction::polynomial(c.iter().map(|z| z.value()).collect(), space),
            FunctionSpec::Geometric { c, rho } => TaylorFunction::geometric(c.value(), *rho, space),
            FunctionSpec::Power { c, alpha } => TaylorFunction::power(c.value(), *alpha, space),
            FunctionSpec::Monomial(k) => Ok(TaylorFunction::monomial(*k, space)),
            FunctionSpec::Coefficients { expr: src, decay } => {
                let e = expr(src, &["k"])?;
                TaylorFunction::lazy(move |k| e.eval(&[k as f64]), *decay, space).map(|f| f.with_label(src.clone()))
            }
        };
        f.map_err(|e| e.to_string())
    }
}

fn eval_with(mut eval: EvalConfig, tol: Option<f64>, tol_override: Option<f64>) -> Result<EvalConfig, String> {
    if let Some(t) = tol_override.or(tol) {
        eval.limit.tol = t;
    }
    eval.validate().map_err(|e| e.to_string())?;
    Ok(eval)
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) && !id.starts_with('.')
}

pub fn parse(text: &str) -> Result<ConfigFile, ConfigError> {
    Ok(serde_json::from_str(text)?)
}

/// Validates and compiles every experiment; `tol_override` replaces all
/// experiment tolerances.
pub fn compile(cfg: &ConfigFile, tol_override: Option<f64>) -> Result<Vec<PlannedExperiment>, ConfigError> {
    if cfg.experiments.is_empty() {
        return Err(ConfigError::Global("experiment list is empty".into()));
    }
    if let Some(t) = tol_override {
        if !(t > 0.0 && t.is_finite()) {
            return Err(ConfigError::Global(format!("--tol must be positive and finite, got {t}")));
        }
    }
    let mut seen = HashSet::new();
    cfg.experiments
        .iter()
        .map(|e| {
            let id = e.id();
            if !valid_id(id) {
                return Err(invalid(id, "ids may only contain ASCII letters, digits, `-`, `_` and `.`"));
            }
            if !seen.insert(id.to_string()) {
                return Err(invalid(id, "duplicate experiment id"));
            }
            compile_one(e, tol_override).map_err(|msg| invalid(id, msg))
        })
        .collect()
}

fn depth_ok(depth: u32) -> Result<u32, String> {
    if (1..=60).contains(&depth) {
        Ok(depth)
    } else {
        Err(format!("depth must lie in 1..=60, got {depth}"))
    }
}

fn compile_one(e: &Experiment, tol_override: Option<f64>) -> Result<PlannedExperiment, String> {
    let (kind, plan) = match e {
        Experiment::CheckRegularity(s) => {
            let eval = eval_with(s.eval, s.tol, tol_override)?;
            let tol = eval.limit.tol;
            let plan = match s.method.build()? {
                Method::Matrix(m) => {
                    let depth = depth_ok(s.m_depth)?;
                    let m_grid: Vec<u64> = (1..=depth).map(|k| 1u64 << k).collect();
                    let n_max = s.n_max.unwrap_or(1u64 << (depth + 1));
                    Plan::MatrixRegularity { method: m, m_grid, n_max, tol }
                }
                Method::SeqToFunc(sf) => {
                    let kernel = match sf {
                        SeqToFuncMethod::Abel => KernelMethod::abel(),
                        SeqToFuncMethod::Custom { .. } => {
                            let label = sf.label();
                            KernelMethod::new(
                                label,
                                IndexDomain::DiscreteNat,
                                IndexDomain::unit_interval(),
                                Measure::Counting,
                                move |r, n| sf.coeff(n as u64, r),
                                |_| (0.0, f64::INFINITY),
                            )
                            .map_err(|e| e.to_string())?
                        }
                    };
                    Plan::KernelRegularity { method: kernel, check: kernel_check(s, tol)?, eval }
                }
                Method::Kernel(k) => Plan::KernelRegularity { method: k, check: kernel_check(s, tol)?, eval },
            };
            ("check_regularity", plan)
        }
        Experiment::Sum(s) => {
            let plan = Plan::Sum {
                method: s.method.build()?,
                sources: sources(&s.sources)?,
                depth: depth_ok(s.depth)?,
                eval: eval_with(s.eval, s.tol, tol_override)?,
            };
            ("sum", plan)
        }
        Experiment::Inclusion(s) => {
            let plan = Plan::Inclusion {
                a: s.a.build()?,
                b: s.b.build()?,
                sources: sources(&s.sources)?,
                depth: depth_ok(s.depth)?,
                eval: eval_with(s.eval, s.tol, tol_override)?,
            };
            ("inclusion", plan)
        }
        Experiment::Transfer(s) => {
            let sp = space(s.dim, s.norm)?;
            let family = match &s.family {
                FamilySpec::Named(n) if n == "truncations" => OperatorFamily::truncations(sp),
                FamilySpec::Named(n) => return Err(format!("unknown operator family `{n}` (builtins: truncations, oscillating_projection)")),
                FamilySpec::OscillatingProjection { oscillating_projection: k } => {
                    OperatorFamily::oscillating_projection(sp, *k).map_err(|e| e.to_string())?
                }
            };
            let probes = s.probes.iter().map(|p| vector(sp, p)).collect::<Result<Vec<_>, _>>()?;
            let d = TransferConfig::default();
            let transfer = TransferConfig {
                depth: depth_ok(s.depth.unwrap_or(d.depth))?,
                regularity_depth: depth_ok(s.regularity_depth.unwrap_or(d.regularity_depth))?,
                battery_depth: depth_ok(s.battery_depth.unwrap_or(d.battery_depth))?,
                battery_tol: s.battery_tol.unwrap_or(d.battery_tol),
            };
            let plan = Plan::Transfer {
                a: s.a.build()?,
                b: s.b.build()?,
                family,
                probes,
                transfer,
                eval: eval_with(s.eval, s.tol, tol_override)?,
            };
            ("transfer", plan)
        }
        Experiment::WeakInclusion(s) => {
            let srcs = sources(&s.sources)?;
            let dim = srcs[0].space().dim();
            let functionals = match &s.functionals {
                FunctionalsSpec::Named(n) if n == "coordinates" => LinearFunctional::coordinates(dim),
                FunctionalsSpec::Named(n) => return Err(format!("unknown functional set `{n}` (builtin: coordinates)")),
                FunctionalsSpec::Weights(ws) => ws
                    .iter()
                    .map(|w| LinearFunctional::new(w.iter().map(|z| z.value()).collect()).map_err(|e| e.to_string()))
                    .collect::<Result<Vec<_>, _>>()?,
            };
            let plan = Plan::WeakInclusion {
                a: s.a.build()?,
                b: s.b.build()?,
                sources: srcs,
                functionals,
                depth: depth_ok(s.depth)?,
                eval: eval_with(s.eval, s.tol, tol_override)?,
            };
            ("weak_inclusion", plan)
        }
        Experiment::Taylor(s) => {
            if s.chains.is_empty() || s.chains.iter().any(Vec::is_empty) {
                return Err("chains must be a nonempty list of nonempty step lists".into());
            }
            let plan = Plan::Taylor {
                function: s.function.build(s.space.build()?)?,
                chains: s.chains.clone(),
                depth: depth_ok(s.depth)?,
                eval: eval_with(s.eval, s.tol, tol_override)?,
            };
            ("taylor", plan)
        }
    };
    Ok(PlannedExperiment {
        id: e.id().to_string(),
        kind,
        plan,
    })
}

fn kernel_check(s: &RegularitySpec, tol: f64) -> Result<KernelCheckConfig, String> {
    let d = KernelCheckConfig::default();
    let check = KernelCheckConfig {
        r_depth: depth_ok(s.r_depth.unwrap_or(d.r_depth))?,
        exhaust_depth: s.exhaust_depth.unwrap_or(d.exhaust_depth),
        tol,
    };
    if check.exhaust_depth == 0 || check.exhaust_depth >= check.r_depth {
        return Err(format!(
            "exhaust_depth must lie in 1..r_depth (r_depth = {}), got {}",
            check.r_depth, check.exhaust_depth
        ));
    }
    Ok(check)
}
