use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fraudgan::data::{Dataset, SynthSpec};
use fraudgan::evaluation::{run_fold_experiment, ExperimentConfig};
use fraudgan::models::{fit_boosted, BoostConfig};
use fraudgan::resampling::{adasyn, smote, Method};

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let build = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
    let mut pools = vec![("sequential", build(1))];
    if cfg!(feature = "parallel") {
        pools.push(("rayon", build(0)));
    }
    pools
}

fn data(majority: usize, minority: usize, dim: usize) -> Dataset {
    SynthSpec::shifted(majority, minority, dim, 2.0, 5).generate().unwrap()
}

fn knn_oversampling(c: &mut Criterion) {
    let d = data(4000, 1000, 8);
    let (minority, majority) = (d.class_rows(1), d.class_rows(0));
    let mut group = c.benchmark_group("knn");
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::new("smote", name), |b| {
            b.iter(|| pool.install(|| smote(&minority, 3000, 5, 1).unwrap()))
        });
        group.bench_function(BenchmarkId::new("adasyn", name), |b| {
            b.iter(|| pool.install(|| adasyn(&minority, &majority, 3000, 5, 1).unwrap()))
        });
    }
    group.finish();
}

fn boosting(c: &mut Criterion) {
    let d = data(5000, 500, 16);
    let config = BoostConfig { rounds: 10, ..BoostConfig::default() };
    let mut group = c.benchmark_group("boosting");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(name, |b| b.iter(|| pool.install(|| fit_boosted(&d, config).unwrap())));
    }
    group.finish();
}

fn folds(c: &mut Criterion) {
    let d = data(3000, 150, 4);
    let config = ExperimentConfig { folds: 5, ..ExperimentConfig::default() };
    let mut group = c.benchmark_group("folds");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(name, |b| {
            b.iter(|| pool.install(|| run_fold_experiment(&d, Method::Smote, &config).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, knn_oversampling, boosting, folds);
criterion_main!(benches);
