//! Numerical summability toolkit.
//!
//! Matrix, sequence-to-function and kernel summability methods acting on
//! sequences and functions with values in `ℂ^d`, together with numerical
//! checks of the Silverman-Toeplitz regularity conditions, inclusion
//! experiments between methods, and Taylor-series summation in Banach
//! spaces of holomorphic functions on the disk.
//!
//! Every quantity that the theory defines through an exact limit is
//! computed here on a finite grid that approaches infinity, and every
//! verdict is three-valued: evidence for, a concrete witness against, or
//! inconclusive.

pub mod domains;
pub mod error;
pub mod holo;
pub mod inclusion;
pub mod integrate;
pub mod methods;
pub mod regularity;
pub mod report;
pub mod source;
pub mod vspace;

pub use domains::{
    estimate_limit_at_infinity, exhaustion, parameter_grid, CompactWindow, ConvergenceEstimate,
    IndexDomain, LimitConfig, Status,
};
pub use error::{Error, Result};
pub use integrate::{adaptive_quadrature, QuadratureConfig, QuadratureResult, Substitution};
pub use methods::{EvalConfig, KernelMethod, MatrixMethod, Method, SeqToFuncMethod, TruncationPolicy};
pub use source::{FunctionSource, SequenceSource, Source};
pub use vspace::{LinearFunctional, NormKind, Operator, Scalar, Space, Vector};
