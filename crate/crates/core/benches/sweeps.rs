use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gslab_core::domain::{Exponent, Potential, ProblemSpec, RadialDomain, Dimension};
use gslab_core::field::ScalarField;
use gslab_core::nullseq::{log_cutoff_family, verify_null_sequence, DecayConvention, Schedule};
use gslab_core::par::Execution;
use gslab_core::picone::{estimate_equivalence_constants, SweepGrid};
use gslab_core::quad::QuadOptions;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn constants_sweep(c: &mut Criterion) {
    let grid = SweepGrid::standard();
    let p = Exponent::new(3.0).unwrap();
    let mut group = c.benchmark_group("equivalence_constants");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| estimate_equivalence_constants(p, &grid, exec).unwrap())
        });
    }
    group.finish();
}

fn null_sequence(c: &mut Criterion) {
    let spec = ProblemSpec::new(
        Exponent::new(3.0).unwrap(),
        Dimension::new(5).unwrap(),
        RadialDomain::punctured_space(),
        Potential::hardy(3.0, 5.0),
    )
    .unwrap();
    let phi = ScalarField::power(1.0, -2.0 / 3.0);
    let fam = log_cutoff_family(8, 4.0, &spec.domain, Schedule::Triangular).unwrap();
    let grid = fam.grid(8).unwrap();
    let conv = DecayConvention::default();
    let mut group = c.benchmark_group("hardy_null_sequence");
    group.sample_size(10);
    for (name, exec) in MODES {
        let opts = QuadOptions::default().with_execution(exec);
        group.bench_with_input(BenchmarkId::from_parameter(name), &opts, |b, opts| {
            b.iter(|| verify_null_sequence(&fam, &phi, &spec, &grid, &conv, opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, constants_sweep, null_sequence);
criterion_main!(benches);
