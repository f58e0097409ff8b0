use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use htsim_core::farima::{build_coeffs, GSpec};
use htsim_core::fraclevy::{LimitParams, LimitSampler};
use htsim_core::innovations::InnovationModel;
use htsim_core::pathsim::{Convolver, Method, ModelStream, Workspace};
use htsim_core::regvar::QuantileModel;
use htsim_core::rng::stream;
use rand::Rng;

fn coefficients(c: &mut Criterion) {
    let spec = GSpec::new(1.5, vec![1.0, 0.3], vec![1.0, -0.5]).unwrap();
    c.bench_function("build_coeffs 1e5", |b| {
        b.iter(|| build_coeffs(&spec, 100_000).unwrap())
    });
}

fn innovations(c: &mut Criterion) {
    let model = InnovationModel::new(QuantileModel::new(1.5, 1.0, 0.7, 0.3).unwrap());
    let mut rng = stream(1, 0, 0);
    let mut out = vec![0.0; 1 << 16];
    c.bench_function("fill two-sided 65536", |b| {
        b.iter(|| model.fill(&mut rng, &mut out))
    });
}

fn convolution(c: &mut Criterion) {
    let table = build_coeffs(&GSpec::fractional(1.5).unwrap(), 1 << 20).unwrap();
    let model = InnovationModel::new(QuantileModel::pareto(1.5, 1.0).unwrap());
    let mut group = c.benchmark_group("path");
    group.sample_size(10);
    for (n, method) in [
        (4096, Method::Direct),
        (4096, Method::Fft),
        (1 << 20, Method::Fft),
    ] {
        let conv = Convolver::with_method(&table, n, method).unwrap();
        let mut ws = Workspace::default();
        let mut rng = stream(2, 0, 0);
        group.bench_with_input(BenchmarkId::new(format!("{method:?}"), n), &n, |b, _| {
            b.iter(|| {
                let seed: u64 = rng.gen();
                conv.simulate(&mut ModelStream::new(&model, stream(seed, 0, 0)), &mut ws)[n - 1]
            })
        });
    }
    group.finish();
}

fn limit_paths(c: &mut Criterion) {
    let mut params = LimitParams::new(1.5, 1.5, 1.0, 0.0);
    params.t_max = 25.0;
    params.nodes = 512;
    let sampler = LimitSampler::new(params).unwrap();
    let mut i = 0;
    c.bench_function("limit path 512 nodes", |b| {
        b.iter(|| {
            i += 1;
            sampler.sample(&mut stream(3, 0, i)).unwrap().values[511]
        })
    });
}

criterion_group!(benches, coefficients, innovations, convolution, limit_paths);
criterion_main!(benches);
