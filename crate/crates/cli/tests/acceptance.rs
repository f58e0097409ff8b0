//! Acceptance suite: one PASS/FAIL line per criterion. Criteria listed in
//! `KNOWN_FAILURES` are reported but do not fail the run; any other failure,
//! or a known failure that starts passing, exits nonzero.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use htsim_core::farima::{build_coeffs, check_hyp_mg, karamata_ratio, GSpec};
use htsim_core::fraclevy::upsilon_scaling_check;
use htsim_core::harness::{
    moment_report, run_limit_sample, run_scaling_experiment, ExperimentConfig, ExperimentResult,
};
use htsim_core::innovations::{decompose_ul, DiscreteLaw, InnovationModel, Law};
use htsim_core::pathsim::{normalizer, Convolver, Method, ModelStream, Workspace};
use htsim_core::regvar::{QuantileModel, ScalingFns};
use htsim_core::rng::stream;
use htsim_core::stats::{ks_null_sd, ks_two_sample};

/// Boundary-argmax rate of the limit sup decays like `T^{−1/2}`; see README.
const KNOWN_FAILURES: [usize; 1] = [10];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn reference_config() -> ExperimentConfig {
    let text = std::fs::read_to_string(workspace_root().join("configs/reference.conf")).unwrap();
    let mut cfg = ExperimentConfig::parse(&text).unwrap();
    cfg.workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    cfg
}

fn c1_coefficients() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut decreasing = true;
    for gamma in [1.2, 1.5, 1.9] {
        let spec = GSpec::fractional(gamma).unwrap();
        let table = build_coeffs(&spec, 10_000).unwrap();
        let devs: Vec<f64> = [100, 1_000, 10_000]
            .iter()
            .map(|&n| (karamata_ratio(&table, &spec, n).unwrap() - 1.0).abs())
            .collect();
        decreasing &= devs.windows(2).all(|w| w[1] < w[0]);
        worst = worst.max(devs[2]);
    }
    let t = start.elapsed();
    outcome(
        worst <= 1e-3 && decreasing && t < Duration::from_secs(1),
        format!("max deviation at n=1e4 {worst:.3e}, decreasing {decreasing}, {t:.2?}"),
    )
}

fn c2_hyp_mg() -> Outcome {
    let start = Instant::now();
    let spec = GSpec::fractional(2.0).unwrap();
    let table = build_coeffs(&spec, 10_001).unwrap();
    let s3 = check_hyp_mg(&table, &spec, 0.3, 1_000).unwrap();
    let s4 = check_hyp_mg(&table, &spec, 0.3, 10_000).unwrap();
    let t = start.elapsed();
    outcome(
        s4 < s3 && s4 < 1e-2 && t < Duration::from_secs(1),
        format!("n=1e3 {s3:.3e}, n=1e4 {s4:.3e}, {t:.2?}"),
    )
}

fn c3_scaling_functions() -> Outcome {
    let scaling = ScalingFns::new(QuantileModel::pareto(1.5, 1.0).unwrap());
    let lambda = scaling.k_inverse(100.0).unwrap();
    let norm = normalizer(0.01, &GSpec::fractional(1.5).unwrap(), &scaling).unwrap();
    let (e1, e2) = ((lambda / 1e6 - 1.0).abs(), (norm / 1e7 - 1.0).abs());
    outcome(
        e1 <= 1e-6 && e2 <= 1e-6,
        format!("k_inverse {lambda:.9e} (rel {e1:.1e}), normalizer {norm:.9e} (rel {e2:.1e})"),
    )
}

fn c4_c5_moments(workers: usize) -> (Outcome, Outcome) {
    let start = Instant::now();
    let report = moment_report(1.0, 4.0, 1.5, 1.5, 100_000, 4, workers).unwrap();
    let t = start.elapsed();
    let z = |exact: f64, mc: f64, se: f64| (mc - exact).abs() / se;
    let zm = z(report.mean_exact, report.mean_mc.0, report.mean_mc.1);
    let r = &report.residual;
    let (z2, z3, z4) = (
        z(r[0].1, r[0].2, r[0].3),
        z(r[1].1, r[1].2, r[1].3),
        z(r[2].1, r[2].2, r[2].3),
    );
    let c4 = outcome(
        zm <= 4.0 && z2 <= 4.0 && t < Duration::from_secs(60),
        format!(
            "mean {:.5} vs {:.5} (z {zm:.2}), M2 {:.5} vs {:.5} (z {z2:.2}), {t:.1?}",
            report.mean_mc.0, report.mean_exact, r[0].2, r[0].1
        ),
    );
    let c5 = outcome(
        z3 <= 4.0 && z4 <= 4.0 && t < Duration::from_secs(120),
        format!(
            "M3 {:.5} vs {:.5} (z {z3:.2}), M4 {:.5} vs {:.5} (z {z4:.2})",
            r[1].2, r[1].1, r[2].2, r[2].1
        ),
    );
    (c4, c5)
}

fn c6_self_similarity() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for (k, lambda) in [0.5, 2.0].into_iter().enumerate() {
        let res =
            upsilon_scaling_check(1.5, 1.5, 4.0, lambda, &[0.2, 0.4], 5000, 60 + k as u64).unwrap();
        for (t, ks) in res {
            pass &= !ks.rejects_at(0.01);
            details.push(format!("λ={lambda} t={t}: p {:.3}", ks.p_value));
        }
    }
    outcome(pass, details.join(", "))
}

fn c7_decomposition() -> Outcome {
    let two_point = DiscreteLaw::new(vec![(-1.0, 0.5), (1.0, 0.5)]).unwrap();
    let symmetric = InnovationModel::new(QuantileModel::new(1.5, 1.0, 0.5, 0.5).unwrap());
    fn check<L: Law>(law: &L, xs: &[f64]) -> (f64, f64) {
        let d = decompose_ul(law).unwrap();
        let rec = xs
            .iter()
            .map(|&x| {
                (d.r * d.cdf_upper(law, x) + (1.0 - d.r) * d.cdf_lower(law, x) - law.cdf(x)).abs()
            })
            .fold(0.0, f64::max);
        (rec, d.mean_upper(law).abs().max(d.mean_lower(law).abs()))
    }
    let xs: Vec<f64> = (-400..=400).map(|i| i as f64 * 0.05).collect();
    let (r1, m1) = check(&two_point, &xs);
    let (r2, m2) = check(&symmetric, &xs);
    let (rec, mean) = (r1.max(r2), m1.max(m2));
    outcome(
        rec <= 1e-12 && mean <= 1e-10,
        format!("reconstruction {rec:.1e}, |means| {mean:.1e}"),
    )
}

fn c8_c9(cfg: &ExperimentConfig, res: &ExperimentResult, elapsed: Duration) -> (Outcome, Outcome) {
    let draws: f64 = res.rows.iter().map(|r| r.horizon as f64).sum::<f64>() * cfg.replicates as f64;
    let c8 = match res.slope {
        Some(fit) => {
            let target = res.slope_target;
            let rel = (fit.slope / target - 1.0).abs();
            outcome(
                rel <= 0.15 && draws <= 5e9,
                format!(
                    "slope {:.3} ± {:.3} vs {target} ({:.1}%), medians {:?}, draws {draws:.3e}, {elapsed:.0?} on {} workers",
                    fit.slope,
                    fit.slope_se,
                    100.0 * rel,
                    res.rows.iter().map(|r| format!("{:.4e}", r.median_raw)).collect::<Vec<_>>(),
                    cfg.workers
                ),
            )
        }
        None => outcome(false, format!("no slope: {}", res.warnings.join("; "))),
    };
    let ks: Vec<f64> = res
        .rows
        .iter()
        .map(|r| r.ks.map_or(f64::NAN, |k| k.statistic))
        .collect();
    let se = ks_null_sd(cfg.replicates, res.limit.len());
    let tol = 2.0 * (2.0 * se * se).sqrt();
    let decreasing = ks.windows(2).all(|w| w[1] <= w[0] + tol);
    let last = *ks.last().unwrap();
    let c9 = outcome(
        decreasing && last <= 0.1,
        format!(
            "KS {:?}, noise allowance {tol:.4}, final {last:.4}",
            ks.iter().map(|k| format!("{k:.4}")).collect::<Vec<_>>()
        ),
    );
    (c8, c9)
}

fn c10_finiteness(cfg: &ExperimentConfig, at_25: &[htsim_core::LimitSup]) -> Outcome {
    let mut c50 = cfg.clone();
    c50.limit.t_max = 50.0;
    let at_50 = run_limit_sample(&c50).unwrap();
    let a: Vec<f64> = at_25.iter().map(|s| s.sup).collect();
    let b: Vec<f64> = at_50.iter().map(|s| s.sup).collect();
    let ks = ks_two_sample(&a, &b).unwrap();
    let w25 = at_25.iter().filter(|s| s.near_boundary).count() as f64 / a.len() as f64;
    let w50 = at_50.iter().filter(|s| s.near_boundary).count() as f64 / b.len() as f64;
    outcome(
        !ks.rejects_at(0.01) && w25 < 0.01 && w50 < 0.01,
        format!(
            "KS(T=25, T=50) {:.4} p {:.2e}, boundary warnings {:.2}% / {:.2}%",
            ks.statistic,
            ks.p_value,
            100.0 * w25,
            100.0 * w50
        ),
    )
}

fn c11_convolution() -> Outcome {
    let spec = GSpec::fractional(1.5).unwrap();
    let table = build_coeffs(&spec, 1_000_000).unwrap();
    let model = InnovationModel::new(QuantileModel::new(1.5, 1.0, 0.7, 0.3).unwrap());
    let direct = Convolver::with_method(&table, 256, Method::Direct).unwrap();
    let fast = Convolver::with_method(&table, 256, Method::Fft).unwrap();
    let (mut w1, mut w2) = (Workspace::default(), Workspace::default());
    let mut worst: f64 = 0.0;
    for rep in 0..100 {
        let a = direct
            .simulate(&mut ModelStream::new(&model, stream(11, 0, rep)), &mut w1)
            .to_vec();
        let b = fast.simulate(&mut ModelStream::new(&model, stream(11, 0, rep)), &mut w2);
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err = a
            .iter()
            .zip(b)
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        worst = worst.max(err / scale);
    }
    let start = Instant::now();
    let conv = Convolver::new(&table, 1_000_000).unwrap();
    let mut ws = Workspace::default();
    let path = conv.simulate(&mut ModelStream::new(&model, stream(11, 1, 0)), &mut ws);
    let t = start.elapsed();
    let finite = path.iter().all(|v| v.is_finite());
    outcome(
        worst <= 1e-8 && t < Duration::from_secs(2) && finite,
        format!("max relative FFT/direct gap {worst:.1e}, n=1e6 path in {t:.2?}"),
    )
}

fn c12_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_htsim");
    let root = workspace_root();
    let base = std::env::temp_dir().join(format!("htsim-accept-{}", std::process::id()));
    let mut bytes = Vec::new();
    for workers in [1, 3] {
        let out = base.join(format!("w{workers}"));
        let status = Command::new(bin)
            .args(["scaling", "--config"])
            .arg(root.join("configs/smoke.conf"))
            .arg("--out")
            .arg(&out)
            .args(["--seed", "12", "--workers", &workers.to_string()])
            .output()
            .unwrap();
        if !status.status.success() {
            return outcome(false, format!("htsim exited with {}", status.status));
        }
        let files = [
            "scaling.csv",
            "limit.csv",
            "replicates.csv",
            "slope.txt",
            "scaling.dat",
        ];
        bytes.push(files.map(|f| std::fs::read(out.join(f)).unwrap()));
    }
    let _ = std::fs::remove_dir_all(&base);
    let same = bytes[0] == bytes[1];
    let lines = String::from_utf8_lossy(&bytes[0][2]).lines().count();
    outcome(
        same,
        format!("workers 1 vs 3: outputs identical {same} ({lines} replicate lines)"),
    )
}

fn main() -> ExitCode {
    let cfg = reference_config();
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut report = |id: usize, name: &'static str, o: Outcome| {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {id:>2} {name}: {}", o.detail);
        results.push((id, name, o));
    };

    report(1, "coefficient oracle", c1_coefficients());
    report(2, "coefficient condition", c2_hyp_mg());
    report(3, "scaling functions", c3_scaling_functions());
    let (c4, c5) = c4_c5_moments(cfg.workers);
    report(4, "Υ mean and variance", c4);
    report(5, "moment recursion", c5);
    report(6, "self-similarity", c6_self_similarity());
    report(7, "decomposition", c7_decomposition());
    let start = Instant::now();
    let res = run_scaling_experiment(&cfg).unwrap();
    let elapsed = start.elapsed();
    let (c8, c9) = c8_c9(&cfg, &res, elapsed);
    report(8, "heavy-traffic scaling law", c8);
    report(9, "distributional convergence", c9);
    report(10, "limit sup finiteness", c10_finiteness(&cfg, &res.limit));
    report(11, "convolution", c11_convolution());
    report(12, "determinism", c12_determinism());

    let passed = results.iter().filter(|r| r.2.pass).count();
    println!("{passed}/{} criteria pass", results.len());
    let mut ok = true;
    for (id, name, o) in &results {
        let known = KNOWN_FAILURES.contains(id);
        if !o.pass && !known {
            println!("unexpected failure: criterion {id} ({name})");
            ok = false;
        }
        if o.pass && known {
            println!("criterion {id} ({name}) now passes; remove it from KNOWN_FAILURES");
            ok = false;
        }
        if !o.pass && known {
            println!("known failure: criterion {id} ({name})");
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
