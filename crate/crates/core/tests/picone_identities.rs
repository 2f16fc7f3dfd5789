use gslab_core::domain::Exponent;
use gslab_core::par::Execution;
use gslab_core::picone::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXPONENTS: [f64; 6] = [1.1, 1.5, 2.0, 2.5, 3.0, 4.0];

fn state() -> impl Strategy<Value = PointState> {
    (0.0f64..2.0, -2.0f64..2.0, 0.5f64..2.0, -2.0f64..2.0).prop_map(|(u, du, v, dv)| PointState::new(u, du, v, dv).unwrap())
}

proptest! {
    #[test]
    fn picone_identity_and_split(s in state(), pi in 0usize..6) {
        let p = Exponent::new(EXPONENTS[pi]).unwrap();
        let l = lagrangian_l(&s, p);
        prop_assert!((picone_r(&s, p) - l).abs() <= 1e-10 * (1.0 + l.abs()));
        let (l1, l2) = (lagrangian_l1(&s, p), lagrangian_l2(&s, p));
        prop_assert!((l1 + l2 - l).abs() <= 1e-10 * (1.0 + l.abs()));
        prop_assert!(l1 >= -1e-12 && l2 >= -1e-12);
    }

    #[test]
    fn scalar_kernel_positive(lt in -8.0f64..8.0, theta in -1.0f64..1.0, p in 1.1f64..4.0) {
        let t = 10f64.powf(lt);
        let p = Exponent::new(p).unwrap();
        prop_assert!(scalar_f(t, theta, p) > 0.0);
        let g = ratio_g(t, theta, p).unwrap();
        prop_assert!(g.is_finite() && g > 0.0);
    }

    #[test]
    fn vector_ratio_is_homogeneous(
        a in prop::array::uniform3(-3.0f64..3.0),
        b in prop::array::uniform3(-3.0f64..3.0),
        lambda in 0.01f64..100.0,
        pi in 0usize..6,
    ) {
        prop_assume!(a.iter().any(|x| x.abs() > 1e-3) && b.iter().any(|x| x.abs() > 1e-3));
        let p = Exponent::new(EXPONENTS[pi]).unwrap();
        let r = vector_inequality_check(&a, &b, p, ZeroIncrement::Reject).unwrap();
        let sa: Vec<f64> = a.iter().map(|x| lambda * x).collect();
        let sb: Vec<f64> = b.iter().map(|x| lambda * x).collect();
        let rs = vector_inequality_check(&sa, &sb, p, ZeroIncrement::Reject).unwrap();
        prop_assert!((r - rs).abs() <= 1e-12 * r.abs().max(1.0));
    }

    #[test]
    fn comparison_kernel_nondecreasing(s in 0.0f64..10.0, t in 0.0f64..10.0, ds in 0.0f64..1.0, dt in 0.0f64..1.0,
        alpha in 0.1f64..3.0, beta in 0.1f64..3.0, p in 2.05f64..5.0) {
        let p = Exponent::new(p).unwrap();
        let base = comparison_kernel(s, t, alpha, beta, p).unwrap();
        prop_assert!(comparison_kernel(s + ds, t, alpha, beta, p).unwrap() >= base);
        prop_assert!(comparison_kernel(s, t + dt, alpha, beta, p).unwrap() >= base);
    }
}

#[test]
fn constants_are_finite_and_positive() {
    for p in [1.5, 3.0] {
        let c = estimate_equivalence_constants(Exponent::new(p).unwrap(), &SweepGrid::standard(), Execution::Parallel).unwrap();
        assert!(c.c_lower > 0.0 && c.c_lower <= c.c_upper && c.c_upper.is_finite(), "{c:?}");
    }
}

#[test]
fn random_vectors_fall_inside_scalar_constants() {
    let p = Exponent::new(3.0).unwrap();
    let c = estimate_equivalence_constants(p, &SweepGrid::standard(), Execution::Parallel).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..2000 {
        let a: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let b: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let r = vector_inequality_check(&a, &b, p, ZeroIncrement::Reject).unwrap();
        assert!(c.contains(r, 1e-3), "{r} outside {c:?}");
    }
}

#[test]
fn execution_modes_give_identical_constants() {
    let p = Exponent::new(2.5).unwrap();
    let g = SweepGrid::new(1e-4, 1e4, 20, 21).unwrap();
    let a = estimate_equivalence_constants(p, &g, Execution::Parallel).unwrap();
    let b = estimate_equivalence_constants(p, &g, Execution::Sequential).unwrap();
    assert_eq!(a, b);
}

#[test]
fn seeded_identity_sweep_is_mode_independent() {
    for p in EXPONENTS {
        let p = Exponent::new(p).unwrap();
        let a = identity_sweep(p, 20_000, 5, Execution::Parallel);
        let b = identity_sweep(p, 20_000, 5, Execution::Sequential);
        assert_eq!(a, b);
        assert!(a.max_defect <= 1e-10 && a.max_split_defect <= 1e-10, "{a:?}");
        assert!(a.min_l1 >= -1e-12 && a.min_l2 >= -1e-12, "{a:?}");
    }
}
