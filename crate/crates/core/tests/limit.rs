use htsim_core::fraclevy::{limit_sup, upsilon_scaling_check, LimitParams, LimitSampler};
use htsim_core::rng::stream;
use htsim_core::stats::{ks_one_sided, ks_two_sample, mean_se, median};

fn sups(gamma: f64, n: u64, seed: u64) -> Vec<f64> {
    let mut p = LimitParams::new(gamma, 1.5, 1.0, 0.0);
    p.t_max = 10.0;
    p.nodes = 512;
    let s = LimitSampler::new(p).unwrap();
    (0..n)
        .map(|i| limit_sup(&s.sample(&mut stream(seed, 0, i)).unwrap()).sup)
        .collect()
}

#[test]
fn sup_decreases_in_gamma() {
    let lo = sups(1.3, 1500, 1);
    let hi = sups(1.8, 1500, 2);
    // larger γ: stochastically smaller sup over the bulk of the law
    let test = ks_one_sided(&hi, &lo).unwrap();
    assert!(test.rejects_at(0.01), "{test:?}");
    assert!(median(&hi) < median(&lo));
    let zeros = |v: &[f64]| v.iter().filter(|&&x| x == 0.0).count();
    assert!(zeros(&hi) > zeros(&lo));
}

#[test]
fn two_sided_path_is_centered() {
    let mut p = LimitParams::new(1.5, 1.5, 0.6, 0.4);
    p.t_max = 4.0;
    p.nodes = 64;
    let s = LimitSampler::new(p).unwrap();
    let vals: Vec<f64> = (0..3000)
        .map(|i| s.sample(&mut stream(5, 0, i)).unwrap().values[63])
        .collect();
    let (m, se) = mean_se(&vals);
    assert!(m.abs() < 4.0 * se, "{m} ± {se}");
}

#[test]
fn self_similarity_at_unit_lambda() {
    let res = upsilon_scaling_check(1.5, 1.5, 4.0, 1.0, &[0.3], 2000, 11).unwrap();
    assert!(!res[0].1.rejects_at(0.01));
}

#[test]
fn sample_is_reproducible() {
    assert_eq!(sups(1.5, 5, 3), sups(1.5, 5, 3));
    let a = sups(1.5, 400, 4);
    let b = sups(1.5, 400, 5);
    assert!(!ks_two_sample(&a, &b).unwrap().rejects_at(0.001));
}
