use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use moikit::documents::from_json;
use moikit::harness::{run_tail_bound, TailBoundExperiment};
use moikit::integrand::integrand_from_divided_difference;
use moikit::linalg::{rng_from_seed, sample_haar_unitary, sample_random_hermitian, RandomOperatorModel};
use moikit::moi::evaluate_hermitian;
use moikit::{HermitianOperator, ScalarFunction};

fn moi_eval(c: &mut Criterion) {
    let mut group = c.benchmark_group("moi_eval_third_order");
    let psi = integrand_from_divided_difference(&ScalarFunction::polynomial(vec![0.0, 0.0, 0.0, 1.0]), 2).unwrap();
    for dim in [4, 8, 16] {
        let model = RandomOperatorModel::uniform(dim, -1.0, 1.0).unwrap();
        let mut rng = rng_from_seed(dim as u64);
        let ops: Vec<HermitianOperator> = (0..3).map(|_| sample_random_hermitian(&model, &mut rng).unwrap()).collect();
        let refs: Vec<&HermitianOperator> = ops.iter().collect();
        let args: Vec<_> = (0..2).map(|_| sample_random_hermitian(&model, &mut rng).unwrap().matrix().clone()).collect();
        group.bench_with_input(BenchmarkId::from_parameter(dim), &dim, |b, _| {
            b.iter(|| evaluate_hermitian(black_box(&refs), &psi, &args).unwrap())
        });
    }
    group.finish();
}

fn haar(c: &mut Criterion) {
    let mut rng = rng_from_seed(3);
    c.bench_function("haar_unitary_16", |b| b.iter(|| sample_haar_unitary(16, &mut rng)));
}

fn tail_bound(c: &mut Criterion) {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/tailbound/kth_derivative.json")).unwrap();
    let mut exp: TailBoundExperiment = from_json(&text).unwrap();
    exp.samples = 1000;
    let mut group = c.benchmark_group("tail_bound");
    group.sample_size(10);
    group.bench_function("kth_derivative_1000", |b| b.iter(|| run_tail_bound(black_box(&exp)).unwrap()));
    group.finish();
}

criterion_group!(benches, moi_eval, haar, tail_bound);
criterion_main!(benches);
