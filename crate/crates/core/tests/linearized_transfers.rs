use gslab_core::domain::{Dimension, Exponent, Potential, ProblemSpec, RadialDomain};
use gslab_core::field::ScalarField;
use gslab_core::linearized::{transfer_a_to_q, transfer_q_to_a, QuadraticFormSpec};
use gslab_core::nullseq::{log_cutoff_family, verify_null_sequence, DecayConvention, Schedule, SequenceVerdict};
use gslab_core::quad::QuadOptions;

fn hardy(p: f64, d: u32) -> QuadraticFormSpec {
    let spec = ProblemSpec::new(Exponent::new(p).unwrap(), Dimension::new(d).unwrap(), RadialDomain::punctured_space(), Potential::hardy(p, d as f64))
        .unwrap();
    QuadraticFormSpec::new(ScalarField::power(1.0, (p - d as f64) / p), spec).unwrap()
}

#[test]
fn superquadratic_null_sequence_transfers_to_the_linearized_form() {
    let q = hardy(3.0, 5);
    let fam = log_cutoff_family(8, 4.0, &q.spec.domain, Schedule::Triangular).unwrap();
    let grid = fam.grid(8).unwrap();
    let conv = DecayConvention::default();
    let base = verify_null_sequence(&fam, &q.phi, &q.spec, &grid, &conv, &QuadOptions::default()).unwrap();
    assert_eq!(base.verdict, SequenceVerdict::NullSequence, "{:?}", base.diagnosis);
    let rep = transfer_q_to_a(&fam, &q, &grid, &conv, &QuadOptions::default()).unwrap();
    assert_eq!(rep.verdict, SequenceVerdict::NullSequence, "{:?}", rep.decay);
    assert!(rep.max_relative_mismatch <= 1e-10, "{}", rep.max_relative_mismatch);
}

#[test]
fn subquadratic_linear_null_sequence_transfers_back() {
    let q = hardy(1.5, 3);
    let fam = log_cutoff_family(8, 4.0, &q.spec.domain, Schedule::Triangular).unwrap();
    let grid = fam.grid(8).unwrap();
    let (rep, a_values) = transfer_a_to_q(&fam, &q, &grid, &DecayConvention::default(), &QuadOptions::default()).unwrap();
    assert!(DecayConvention::default().assess(&a_values).decays, "{a_values:?}");
    assert_eq!(rep.verdict, SequenceVerdict::NullSequence, "{:?}", rep.decay);
    assert!(rep.max_relative_mismatch <= 1e-6, "{}", rep.max_relative_mismatch);
}

#[test]
fn transfers_approach_each_other_near_quadratic() {
    // below p = 2 only the a → Q direction applies; at p → 2⁻ the
    // transferred energies approach the Q energies of the family itself
    let conv = DecayConvention::default();
    let gap = |p: f64| {
        let q = hardy(p, 3);
        let fam = log_cutoff_family(4, 4.0, &q.spec.domain, Schedule::Triangular).unwrap();
        let grid = fam.grid(8).unwrap();
        let (rep, _) = transfer_a_to_q(&fam, &q, &grid, &conv, &QuadOptions::default()).unwrap();
        let base = verify_null_sequence(&fam, &q.phi, &q.spec, &grid, &conv, &QuadOptions::default()).unwrap();
        rep.values().iter().zip(base.q_values()).map(|(a, b)| (a / b - 1.0).abs()).fold(0.0, f64::max)
    };
    let (far, near) = (gap(1.5), gap(1.9));
    assert!(near < far, "{near} vs {far}");
    assert!(near < 0.2, "{near}");
}
