use gslab_core::domain::make_grid;
use gslab_core::par::Execution;
use gslab_core::quad::QuadOptions;
use gslab_core::solutions::{
    log_radii, make_family, random_bumps, strong_residual_report, weak_residual_report, FamilyParams, ResidualVerdict,
};

fn strong_max(name: &str, params: FamilyParams) -> f64 {
    let fam = make_family(name, &params).unwrap();
    let spec = fam.spec().unwrap();
    let lo = if spec.domain.r_min > 0.0 { spec.domain.r_min * 1.01 } else { 1e-4 };
    let rep = strong_residual_report(&fam.field, &spec, &log_radii(lo, lo * 1e8, 100), 1e-8, Execution::Sequential).unwrap();
    rep.max_abs
}

#[test]
fn solution_families_have_small_strong_residuals() {
    for (p, d) in [(2.0, 3u32), (2.5, 3), (3.0, 5), (1.5, 3), (4.0, 6)] {
        assert!(strong_max("hardy_phi", FamilyParams::new(p, d)) <= 1e-8, "hardy_phi p = {p}");
        for alpha in [0.0, 0.5, 1.0, 5.0] {
            let m = strong_max("psi_alpha", FamilyParams::new(p, d).alpha(alpha));
            assert!(m <= 1e-8, "psi_alpha α = {alpha}, p = {p}, d = {d}: {m:e}");
        }
    }
    for (p, d) in [(2.0, 1u32), (3.0, 4), (1.5, 2)] {
        assert_eq!(strong_max("constant", FamilyParams::new(p, d)), 0.0);
    }
    assert!(strong_max("eta_phi", FamilyParams::new(3.0, 5).gamma(1.0)) <= 1e-8);
}

#[test]
fn moser_type_profile_is_a_strict_supersolution() {
    for (p, d) in [(2.0, 3u32), (3.0, 5), (1.5, 3)] {
        let fam = make_family("mp_supersol", &FamilyParams::new(p, d)).unwrap();
        let spec = fam.spec().unwrap();
        let strong = strong_residual_report(&fam.field, &spec, &log_radii(1e-3, 1e3, 100), 1e-8, Execution::Sequential).unwrap();
        assert!(strong.values.iter().all(|&v| v >= -1e-8), "p = {p}");
        assert_eq!(strong.verdict, ResidualVerdict::Supersolution);
        let grid = make_grid(&spec.domain, 16, (1e-4, 1e4)).unwrap();
        let bumps = random_bumps(20, 1e-3, 1e3, 42).unwrap();
        let weak = weak_residual_report(&fam.field, &spec, &bumps, &grid, 1e-8, &QuadOptions::default()).unwrap();
        assert!(weak.values.iter().all(|&v| v >= -1e-8), "p = {p}: {:?}", weak.values);
    }
}

#[test]
fn weak_residuals_of_solutions_vanish() {
    let fam = make_family("psi_alpha", &FamilyParams::new(2.5, 3).alpha(1.0)).unwrap();
    let spec = fam.spec().unwrap();
    let grid = make_grid(&spec.domain, 16, (1e-4, 1e4)).unwrap();
    let bumps = random_bumps(20, 1e-3, 1e3, 9).unwrap();
    let rep = weak_residual_report(&fam.field, &spec, &bumps, &grid, 1e-8, &QuadOptions::default()).unwrap();
    assert_eq!(rep.verdict, ResidualVerdict::Solution, "{:?}", rep.values);
}
