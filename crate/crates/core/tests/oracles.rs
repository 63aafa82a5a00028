//! Closed-form values computed independently of the library and frozen here.

use summability::holo::{bhfd_norm, log_multipliers, partial_sum_distances, BhfdSpace, TaylorFunction};
use summability::integrate::{step_integral, Support, StepFunction, StepPiece};
use summability::methods::{matrix_transform, seq2func_transform};
use summability::regularity::{check_kernel_st, check_matrix_st, default_m_grid, group_norm_matrix_row, KernelCheckConfig, Overall};
use summability::*;

fn c(x: f64) -> Scalar {
    Scalar::new(x, 0.0)
}

fn alternating() -> SequenceSource {
    SequenceSource::scalar_fn(|n| c(if n % 2 == 0 { 1.0 } else { -1.0 }))
}

/// `∫_0^r t^k/(1−t) dt = −log(1−r) − Σ_{j=1}^k r^j/j`.
fn lambda_oracle(r: f64, k: u32) -> f64 {
    let log = -(1.0 - r).ln();
    let partial: f64 = (1..=k).map(|j| r.powi(j as i32) / j as f64).sum();
    (log - partial) / log
}

#[test]
fn cesaro_means_of_grandi_partial_sums() {
    // Partial sums of Σ(−1)^n are 1, 0, 1, 0, ...; the mean of the first
    // m + 1 of them is ceil((m+1)/2)/(m+1).
    let s = SequenceSource::partial_sums(alternating());
    let t = TruncationPolicy::default();
    for m in [0u64, 1, 2, 7, 100, 1001] {
        let got = matrix_transform(&MatrixMethod::Cesaro, &s, m, &t).unwrap().coords()[0];
        let expect = ((m + 2) / 2) as f64 / (m + 1) as f64;
        assert!((got - c(expect)).norm() < 1e-14, "m = {m}: {got} vs {expect}");
    }
}

#[test]
fn abel_means_of_alternating_sequence() {
    // (1 − r) Σ (−r)^n = (1 − r)/(1 + r).
    let t = TruncationPolicy::default();
    for r in [0.0, 0.3, 0.5, 0.9, 0.99] {
        let got = seq2func_transform(&SeqToFuncMethod::Abel, &alternating(), r, &t).unwrap().coords()[0];
        assert!((got - c((1.0 - r) / (1.0 + r))).norm() < 1e-12, "r = {r}");
    }
}

#[test]
fn abel_means_of_growing_witness() {
    // (1 − r) Σ (n+1)(−r)^n = (1 − r)/(1 + r)^2.
    let v = SequenceSource::scalar_fn(|n| c(if n % 2 == 0 { 1.0 } else { -1.0 } * (n as f64 + 1.0)));
    let t = TruncationPolicy::default();
    for r in [0.25, 0.5, 0.75] {
        let got = seq2func_transform(&SeqToFuncMethod::Abel, &v, r, &t).unwrap().coords()[0];
        let expect = (1.0 - r) / (1.0 + r).powi(2);
        assert!((got - c(expect)).norm() < 1e-12, "r = {r}: {got} vs {expect}");
    }
}

#[test]
fn log_multipliers_match_antiderivative() {
    let q = QuadratureConfig::default();
    for r in [0.1, 0.5, 1.0 - (-1f64).exp(), 0.9, 0.999] {
        let lam = log_multipliers(r, 12, &q).unwrap();
        for (k, l) in lam.iter().enumerate() {
            assert!((l - lambda_oracle(r, k as u32)).abs() < 1e-9, "r = {r}, k = {k}: {l}");
        }
    }
}

#[test]
fn frozen_lambda_one() {
    let r = 1.0 - (-1f64).exp();
    let lam = log_multipliers(r, 1, &QuadratureConfig::default()).unwrap();
    assert!((lam[1] - 0.367_879_441_171_442_33).abs() < 1e-10);
}

#[test]
fn geometric_coefficient_norms() {
    let t = TruncationPolicy::default();
    let f = TaylorFunction::geometric(c(1.0), 0.5, BhfdSpace::H2).unwrap();
    assert!((bhfd_norm(&f, &t).unwrap().value - 1.154_700_538_379_251_5).abs() < 1e-13);
    let d = partial_sum_distances(&f, 30, &t).unwrap();
    for (n, got) in d.iter().enumerate() {
        let expect = 2f64.powi(-(n as i32)) / 3f64.sqrt();
        assert!((got - expect).abs() < 1e-10, "n = {n}");
    }
}

#[test]
fn matrix_regularity_of_builtins() {
    let grid = default_m_grid();
    for (m, regular) in [(MatrixMethod::Cesaro, true), (MatrixMethod::Identity, true), (MatrixMethod::SeriesSummation, false)] {
        let rep = check_matrix_st(&m, &grid, 1 << 15, 1e-6).unwrap();
        match (&rep.overall, regular) {
            (Overall::RegularEvidence, true) => {}
            (Overall::NotRegular { witness }, false) => assert_eq!(witness.condition, "c1"),
            (o, _) => panic!("{}: {o:?}", m.label()),
        }
    }
}

#[test]
fn log_kernel_row_integral_is_one() {
    let rep = check_kernel_st(&KernelMethod::logarithmic(), &KernelCheckConfig::default(), &EvalConfig::default()).unwrap();
    assert_eq!(rep.overall, Overall::RegularEvidence);
    for v in rep.k4.values().into_iter().flatten() {
        assert!((v - 1.0).abs() < 1e-8);
    }
}

#[test]
fn cesaro_group_norms_are_one() {
    for m in [0u64, 1, 5, 1 << 20] {
        assert_eq!(group_norm_matrix_row(&MatrixMethod::Cesaro, m, m).value, 1.0);
    }
}

#[test]
fn step_integral_by_hand() {
    let s = Space::new(2, NormKind::L2).unwrap();
    let x = Vector::from_reals(s, &[1.0, -2.0]).unwrap();
    let y = Vector::from_reals(s, &[0.5, 0.0]).unwrap();
    let f = StepFunction::new(vec![
        StepPiece { support: Support::Intervals(vec![(0.0, 0.25), (1.0, 2.0)]), value: x },
        StepPiece { support: Support::Intervals(vec![(0.5, 0.75)]), value: y },
    ])
    .unwrap();
    let got = step_integral(&f);
    assert_eq!(got.coords(), &[c(1.25 + 0.125), c(-2.5)]);
}
