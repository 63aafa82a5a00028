use proptest::prelude::*;

use summability::domains::estimate_partial;
use summability::holo::{abel_dilate, abel_dilate_double_sum, bhfd_norm, log_multipliers, partial_sum, BhfdSpace, TaylorFunction};
use summability::inclusion::{inclusion_experiment, Consistency};
use summability::integrate::{integral_of_norm, step_integral, StepFunction, StepPiece, Support};
use summability::methods::{matrix_transform, seq2func_transform};
use summability::regularity::group_norm_scalar_row;
use summability::*;

fn cfg() -> ProptestConfig {
    ProptestConfig::with_cases(48)
}

fn scalar() -> impl Strategy<Value = Scalar> {
    (-10.0..10.0f64, -10.0..10.0f64).prop_map(|(a, b)| Scalar::new(a, b))
}

fn norm_kind() -> impl Strategy<Value = NormKind> {
    prop_oneof![Just(NormKind::L1), Just(NormKind::L2), Just(NormKind::Sup)]
}

fn vec_in(space: Space) -> impl Strategy<Value = Vector> {
    prop::collection::vec(scalar(), space.dim()).prop_map(move |c| Vector::new(space, c).unwrap())
}

fn space_and_vecs(n: usize) -> impl Strategy<Value = (Space, Vec<Vector>)> {
    (1usize..6, norm_kind()).prop_flat_map(move |(d, k)| {
        let s = Space::new(d, k).unwrap();
        (Just(s), prop::collection::vec(vec_in(s), n))
    })
}

fn poly(max_degree: usize) -> impl Strategy<Value = Vec<Scalar>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| Scalar::new(a, b)), 1..=max_degree + 1)
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn norm_axioms((_s, v) in space_and_vecs(2), a in scalar()) {
        let (x, y) = (&v[0], &v[1]);
        prop_assert!(x.norm() >= 0.0);
        prop_assert!((&*x + y).norm() <= x.norm() + y.norm() + 1e-12);
        prop_assert!((x.scale(a).norm() - a.norm() * x.norm()).abs() <= 1e-12 * (1.0 + a.norm() * x.norm()));
        prop_assert_eq!(x.distance(x), 0.0);
    }

    #[test]
    fn functional_bound((s, v) in space_and_vecs(1), w in prop::collection::vec(scalar(), 5)) {
        let phi = LinearFunctional::new(w[..s.dim()].to_vec()).unwrap();
        let x = &v[0];
        let lhs = phi.apply(x).unwrap().norm();
        prop_assert!(lhs <= phi.dual_norm(s.norm_kind()) * x.norm() * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn exhaustion_is_monotone(n in 0u32..30, right in prop_oneof![Just(1.0f64), Just(f64::INFINITY), 0.1..5.0f64]) {
        for d in [IndexDomain::DiscreteNat, IndexDomain::HalfOpen { right }] {
            let (a, b) = (exhaustion(d, n), exhaustion(d, n + 1));
            prop_assert!(a.upper() < b.upper());
            prop_assert!(d.contains(b.upper()));
        }
    }

    #[test]
    fn estimator_finds_constant_limits(x in vec_in(Space::new(3, NormKind::L2).unwrap()), extra in 0usize..5) {
        let lim = LimitConfig::default();
        let samples = vec![x.clone(); lim.window + extra];
        let e = estimate_limit_at_infinity(&samples, &lim).unwrap();
        prop_assert_eq!(e.status, Status::Converged);
        prop_assert_eq!(e.value.unwrap(), x);
    }

    #[test]
    fn estimator_is_idempotent(x in vec_in(Space::new(2, NormKind::Sup).unwrap()), eps in prop::collection::vec(-1e-8..1e-8f64, 6)) {
        let lim = LimitConfig::default();
        let s = x.space();
        let samples: Vec<Vector> = eps.iter().map(|e| &x + &Vector::from_reals(s, &[*e, -*e]).unwrap()).collect();
        let first = estimate_limit_at_infinity(&samples, &lim).unwrap();
        prop_assert_eq!(first.status, Status::Converged);
        let v = first.value.unwrap();
        let again = estimate_limit_at_infinity(&vec![v.clone(); lim.window], &lim).unwrap();
        prop_assert_eq!(again.value.unwrap(), v);
    }

    #[test]
    fn estimator_soundness_on_undefined_tail(x in vec_in(Space::new(1, NormKind::L1).unwrap())) {
        let lim = LimitConfig::default();
        let refs: Vec<Option<&Vector>> = vec![Some(&x), Some(&x), Some(&x), Some(&x), None];
        prop_assert_eq!(estimate_partial(&refs, &lim).unwrap().status, Status::Inconclusive);
    }

    #[test]
    fn transforms_are_linear(a in scalar(), b in scalar(), p in 0.0..0.95f64, m in 0u64..200, s1 in 0.1..0.9f64, s2 in -0.9..-0.1f64) {
        let space = Space::new(2, NormKind::L2).unwrap();
        let u = SequenceSource::from_fn(space, move |n, out| { out[0] = Scalar::new(s1.powi(n as i32), 0.0); out[1] = Scalar::new(0.0, 1.0); });
        let v = SequenceSource::from_fn(space, move |n, out| { out[0] = Scalar::new(1.0, 0.0); out[1] = Scalar::new(s2.powi(n as i32), 0.0); });
        let w = SequenceSource::linear_combination(a, &u, b, &v).unwrap();
        let t = TruncationPolicy::default();
        let check = |tu: Vector, tv: Vector, tw: Vector| -> Result<()> {
            let mut expect = tu.scale(a);
            expect.axpy(b, &tv);
            assert!(tw.distance(&expect) <= 1e-11 * (1.0 + expect.norm()));
            Ok(())
        };
        check(
            matrix_transform(&MatrixMethod::Cesaro, &u, m, &t).unwrap(),
            matrix_transform(&MatrixMethod::Cesaro, &v, m, &t).unwrap(),
            matrix_transform(&MatrixMethod::Cesaro, &w, m, &t).unwrap(),
        ).unwrap();
        check(
            seq2func_transform(&SeqToFuncMethod::Abel, &u, p, &t).unwrap(),
            seq2func_transform(&SeqToFuncMethod::Abel, &v, p, &t).unwrap(),
            seq2func_transform(&SeqToFuncMethod::Abel, &w, p, &t).unwrap(),
        ).unwrap();
    }

    #[test]
    fn identity_and_constants(x in vec_in(Space::new(3, NormKind::L1).unwrap()), m in 0u64..1000, r in 0.0..0.999f64) {
        let v = SequenceSource::constant(x.clone());
        let t = TruncationPolicy::default();
        prop_assert_eq!(matrix_transform(&MatrixMethod::Identity, &v, m, &t).unwrap(), x.clone());
        prop_assert!(matrix_transform(&MatrixMethod::Cesaro, &v, m, &t).unwrap().distance(&x) <= 1e-13 * (1.0 + x.norm()));
        prop_assert!(seq2func_transform(&SeqToFuncMethod::Abel, &v, r, &t).unwrap().distance(&x) <= 1e-12 * (1.0 + x.norm()));
    }

    #[test]
    fn step_integral_refinement_invariance(v in prop::collection::vec(scalar(), 2), a in -5.0..0.0f64, len in 0.1..5.0f64, cut in 0.01..0.99f64) {
        let s = Space::new(2, NormKind::L2).unwrap();
        let x = Vector::new(s, v).unwrap();
        let b = a + len;
        let mid = a + cut * len;
        let whole = StepFunction::new(vec![StepPiece { support: Support::Intervals(vec![(a, b)]), value: x.clone() }]).unwrap();
        let split = StepFunction::new(vec![
            StepPiece { support: Support::Intervals(vec![(a, mid)]), value: x.clone() },
            StepPiece { support: Support::Intervals(vec![(mid, b)]), value: x.clone() },
        ]).unwrap();
        prop_assert_eq!(step_integral(&whole), step_integral(&split));
    }

    #[test]
    fn bochner_norm_inequality(c in prop::collection::vec(scalar(), 6), k in norm_kind()) {
        let s = Space::new(2, k).unwrap();
        let f = move |t: f64, out: &mut [Scalar]| {
            out[0] = c[0] + c[1] * t + c[2] * t * t;
            out[1] = c[3] + c[4] * t + c[5] * t * t * t;
        };
        let q = QuadratureConfig::default();
        let int = adaptive_quadrature(s, &f, -1.0, 2.0, &q).unwrap().value;
        let on = integral_of_norm(&f, s, -1.0, 2.0, &q).unwrap();
        prop_assert!(int.norm() <= on + 1e-9);
    }

    #[test]
    fn dilate_identity(c in poly(64), r in prop_oneof![Just(0.25f64), Just(0.5), Just(0.9)]) {
        let n = c.len() as u64 - 1;
        let f = TaylorFunction::polynomial(c.clone(), BhfdSpace::H2).unwrap();
        let t = TruncationPolicy::default();
        let double = abel_dilate_double_sum(&f, r, n, &t).unwrap();
        for (k, (a, d)) in c.iter().zip(&double).enumerate() {
            prop_assert!((a * r.powi(k as i32) - d).norm() <= 1e-12);
        }
    }

    #[test]
    fn dilate_is_contractive(c in poly(40), r in 0.0..0.999f64) {
        let t = TruncationPolicy::default();
        let f = TaylorFunction::polynomial(c, BhfdSpace::H2).unwrap();
        let g = abel_dilate(&f, r, &t).unwrap();
        prop_assert!(bhfd_norm(&g, &t).unwrap().value <= bhfd_norm(&f, &t).unwrap().value * (1.0 + 1e-15));
    }

    #[test]
    fn partial_sum_is_projection(c in poly(30), n in 0u64..40) {
        let f = TaylorFunction::polynomial(c, BhfdSpace::Wiener).unwrap();
        let once = partial_sum(&f, n);
        let twice = partial_sum(&once, n);
        prop_assert_eq!(once.coeffs_upto(n + 2), twice.coeffs_upto(n + 2));
    }

    #[test]
    fn group_norm_is_l1_and_monotone(c in prop::collection::vec(scalar(), 1..40)) {
        let n = c.len() as u64 - 1;
        let g = |k: u64| c[k as usize];
        let l1: f64 = c.iter().fold(0.0, |acc, z| acc + z.norm());
        prop_assert_eq!(group_norm_scalar_row(g, n).value, l1);
        for m in 0..n {
            prop_assert!(group_norm_scalar_row(g, m).value <= group_norm_scalar_row(g, m + 1).value);
        }
    }
}

#[test]
fn multipliers_lie_in_unit_interval_and_increase() {
    let q = QuadratureConfig::default();
    let mut prev = vec![0.0; 33];
    for j in 1..=20 {
        let r = 1.0 - 2f64.powi(-j);
        let lam = log_multipliers(r, 32, &q).unwrap();
        for k in 0..=32 {
            assert!((0.0..=1.0).contains(&lam[k]), "j = {j}, k = {k}");
            assert!(lam[k] >= prev[k], "j = {j}, k = {k}");
            if k > 0 {
                assert!(lam[k] <= lam[k - 1]);
            }
        }
        prev = lam;
    }
}

#[test]
fn inclusion_is_reflexive_on_scalar_battery() {
    let cfg = EvalConfig::default();
    for m in [Method::cesaro(), Method::abel()] {
        let tests = summability::inclusion::scalar_battery(m.input_domain());
        let rep = inclusion_experiment(&m, &m, &tests, 12, &cfg).unwrap();
        for c in &rep.cases {
            assert!(!matches!(c.consistency, Consistency::Violates { .. }), "{}: {:?}", c.label, c.consistency);
        }
    }
}

#[test]
fn weak_check_detects_perturbation() {
    let s = Space::new(3, NormKind::L2).unwrap();
    let f = |t: f64, out: &mut [Scalar]| {
        out[0] = Scalar::new(t, 0.0);
        out[1] = Scalar::new(t * t, 1.0);
        out[2] = Scalar::new(0.0, t.sin());
    };
    let q = QuadratureConfig::with_tol(1e-6);
    let exact = Vector::new(s, vec![Scalar::new(0.5, 0.0), Scalar::new(1.0 / 3.0, 1.0), Scalar::new(0.0, 1.0 - 1f64.cos())]).unwrap();
    let phis = LinearFunctional::coordinates(3);
    let ok = summability::integrate::weak_integral_check(f, s, (0.0, 1.0), &exact, &phis, &q).unwrap();
    assert!(ok.iter().all(|c| c.pass));
    let mut bad = exact.clone();
    bad.axpy(Scalar::new(1e-3, 0.0), &s.basis(1).unwrap());
    let caught = summability::integrate::weak_integral_check(f, s, (0.0, 1.0), &bad, &phis, &q).unwrap();
    assert!(!caught[1].pass && caught[0].pass && caught[2].pass);
}
