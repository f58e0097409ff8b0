//! Parallel Monte Carlo runs. Every replicate owns a stream derived from
//! `(seed, family, index)` and results are collected in index order, so the
//! output does not depend on the worker count.

use std::fmt::Write as _;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::farima::build_coeffs;
use crate::fraclevy::{
    limit_sup, moment_recursion, sample_points, upsilon, upsilon_mean, LimitSampler, LimitSup,
    ResidualSampler,
};
use crate::innovations::InnovationModel;
use crate::pathsim::{
    partial_sum_normalizer, sup_statistic, Convolver, InnovationStream, ModelStream, Workspace,
};
use crate::rng::{stream, SimRng, LIMIT_FAMILY};
use crate::stats::{
    central_moments, fit_loglog_slope, ks_two_sample, mean_se, quantile_sorted, sorted_copy,
    KsOutcome, SlopeFit,
};

/// Fewest replicates for which a KS comparison is reported.
pub const MIN_KS_REPLICATES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub a: f64,
    pub sup: f64,
    pub scaled_sup: f64,
    pub argmax: usize,
    pub horizon: usize,
    pub warn: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub a: f64,
    pub lambda: f64,
    pub horizon: usize,
    /// `a·g_[0,Λ)`.
    pub normalizer: f64,
    pub median_raw: f64,
    pub median: f64,
    pub q10: f64,
    pub q90: f64,
    pub ks: Option<KsOutcome>,
    pub n_eff: f64,
    pub boundary_warnings: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentResult {
    pub rows: Vec<ScalingRow>,
    pub replicates: Vec<Vec<ReplicateRecord>>,
    pub limit: Vec<LimitSup>,
    pub slope: Option<SlopeFit>,
    /// `1 − γα/(α − 1)`.
    pub slope_target: f64,
    pub warnings: Vec<String>,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::config(format!("cannot start {workers} workers: {e}")))
}

/// `sup_t(L(t) − t^γ)` for `cfg.limit.paths` independent limit paths.
pub fn run_limit_sample(cfg: &ExperimentConfig) -> Result<Vec<LimitSup>> {
    if cfg.limit.paths == 0 {
        return Ok(Vec::new());
    }
    let sampler = LimitSampler::new(cfg.limit_params())?;
    pool(cfg.workers)?.install(|| {
        (0..cfg.limit.paths as u64)
            .into_par_iter()
            .map(|i| {
                sampler
                    .sample(&mut stream(cfg.seed, LIMIT_FAMILY, i))
                    .map(|p| limit_sup(&p))
            })
            .collect()
    })
}

/// Scaling experiment with innovations from the configured model, compared
/// with a freshly sampled limit distribution.
pub fn run_scaling_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let limit = run_limit_sample(cfg)?;
    run_scaling_with(cfg, limit, |model, rng| {
        Box::new(ModelStream::new(model, rng))
    })
}

/// Scaling experiment with a custom innovation source and a given limit sample.
pub fn run_scaling_with<F>(
    cfg: &ExperimentConfig,
    limit: Vec<LimitSup>,
    make_stream: F,
) -> Result<ExperimentResult>
where
    F: for<'m> Fn(&'m InnovationModel, SimRng) -> Box<dyn InnovationStream + 'm> + Sync,
{
    cfg.validate()?;
    let model = cfg.build_model()?;
    let lambdas: Vec<f64> = cfg
        .a_grid
        .iter()
        .map(|&a| model.scaling.lambda(a))
        .collect::<Result<_>>()?;
    let horizons: Vec<usize> = lambdas
        .iter()
        .map(|&l| cfg.horizon.horizon_for_lambda(l))
        .collect::<Result<_>>()?;
    let table_len = horizons
        .iter()
        .copied()
        .chain(lambdas.iter().map(|l| l.ceil() as usize + 1))
        .max()
        .unwrap_or(1);
    let coeffs = build_coeffs(&model.spec, table_len)?;
    let limit_sorted = sorted_copy(&limit.iter().map(|s| s.sup).collect::<Vec<_>>());
    let pool = pool(cfg.workers)?;

    let mut result = ExperimentResult {
        slope_target: 1.0 - cfg.model.gamma * cfg.model.alpha / (cfg.model.alpha - 1.0),
        limit,
        ..Default::default()
    };
    if cfg.replicates < MIN_KS_REPLICATES && !limit_sorted.is_empty() {
        result.warnings.push(format!(
            "{} replicates per a is below {MIN_KS_REPLICATES}; KS distances are not reported",
            cfg.replicates
        ));
    }
    let boundary = result.limit.iter().filter(|s| s.near_boundary).count();
    if boundary > 0 {
        result.warnings.push(format!(
            "limit: argmax in the last 10% of [0, {}] for {boundary} of {} paths",
            cfg.limit.t_max,
            result.limit.len()
        ));
    }

    for (k, ((&a, &lambda), &horizon)) in cfg.a_grid.iter().zip(&lambdas).zip(&horizons).enumerate()
    {
        let conv = Convolver::new(&coeffs, horizon)?;
        let norm = partial_sum_normalizer(a, &coeffs, &model.scaling)?;
        let records: Vec<ReplicateRecord> = pool.install(|| {
            (0..cfg.replicates)
                .into_par_iter()
                .map_init(Workspace::default, |ws, i| {
                    let rng = stream(cfg.seed, k as u64, i as u64);
                    let mut src = make_stream(&model.innovations, rng);
                    let path = conv.simulate(src.as_mut(), ws);
                    let s = sup_statistic(path, &coeffs, a)?;
                    Ok(ReplicateRecord {
                        replicate: i,
                        a,
                        sup: s.sup,
                        scaled_sup: s.sup.max(0.0) / norm,
                        argmax: s.argmax,
                        horizon,
                        warn: s.near_horizon(cfg.horizon.warn_fraction),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })?;
        let raw = sorted_copy(&records.iter().map(|r| r.sup).collect::<Vec<_>>());
        let scaled = sorted_copy(&records.iter().map(|r| r.scaled_sup).collect::<Vec<_>>());
        let ks = if limit_sorted.is_empty() || cfg.replicates < MIN_KS_REPLICATES {
            None
        } else {
            Some(ks_two_sample(&scaled, &limit_sorted)?)
        };
        let warned = records.iter().filter(|r| r.warn).count();
        if warned > 0 {
            result.warnings.push(format!(
                "a = {a}: argmax beyond {} of the horizon in {warned} of {} replicates",
                cfg.horizon.warn_fraction, cfg.replicates
            ));
        }
        result.rows.push(ScalingRow {
            a,
            lambda,
            horizon,
            normalizer: norm,
            median_raw: quantile_sorted(&raw, 0.5),
            median: quantile_sorted(&scaled, 0.5),
            q10: quantile_sorted(&scaled, 0.1),
            q90: quantile_sorted(&scaled, 0.9),
            n_eff: ks.map_or(cfg.replicates as f64, |k| k.effective_n),
            ks,
            boundary_warnings: warned,
        });
        result.replicates.push(records);
    }

    if result.rows.len() >= 3 {
        let xs: Vec<f64> = result.rows.iter().map(|r| r.a).collect();
        let ys: Vec<f64> = result.rows.iter().map(|r| r.median_raw).collect();
        match fit_loglog_slope(&xs, &ys) {
            Ok(fit) => result.slope = Some(fit),
            Err(e) => result.warnings.push(format!("slope fit skipped: {e}")),
        }
    } else {
        result
            .warnings
            .push("slope fit needs at least 3 grid points".into());
    }
    Ok(result)
}

/// Monte Carlo and closed-form moments of `Υ` and of its truncation residual.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub t: f64,
    pub m: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub clouds: usize,
    pub mean_exact: f64,
    pub mean_mc: (f64, f64),
    /// `(order, recursion, Monte Carlo, standard error)` for orders 2..=4.
    pub residual: Vec<(usize, f64, f64, f64)>,
}

impl MomentReport {
    /// Largest deviation in units of the Monte Carlo standard error.
    pub fn max_z(&self) -> f64 {
        let zm = (self.mean_mc.0 - self.mean_exact).abs() / self.mean_mc.1;
        self.residual
            .iter()
            .map(|&(_, exact, mc, se)| (mc - exact).abs() / se)
            .fold(zm, f64::max)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# t = {}, m = {}, gamma = {}, alpha = {}, clouds = {}",
            self.t, self.m, self.gamma, self.alpha, self.clouds
        );
        let _ = writeln!(
            s,
            "{:<12} {:>14} {:>14} {:>12} {:>8}",
            "quantity", "exact", "monte_carlo", "se", "z"
        );
        let mut row = |name: &str, exact: f64, mc: f64, se: f64| {
            let _ = writeln!(
                s,
                "{:<12} {:>14.6} {:>14.6} {:>12.6} {:>8.2}",
                name,
                exact,
                mc,
                se,
                (mc - exact) / se
            );
        };
        row("mean", self.mean_exact, self.mean_mc.0, self.mean_mc.1);
        for &(p, exact, mc, se) in &self.residual {
            row(&format!("M_{p}"), exact, mc, se);
        }
        s
    }
}

/// Stream families for the moment oracles.
const UPSILON_FAMILY: u64 = 0x0CE5_0000_0000_0001;
const RESIDUAL_FAMILY: u64 = 0x0CE5_0000_0000_0002;

pub fn moment_report(
    t: f64,
    m: f64,
    gamma: f64,
    alpha: f64,
    clouds: usize,
    seed: u64,
    workers: usize,
) -> Result<MomentReport> {
    if clouds < 2 {
        return Err(Error::usage("moment report needs at least 2 clouds"));
    }
    let exact = moment_recursion(4, t, m, gamma, alpha)?;
    let (ups, res) = pool(workers)?.install(|| -> Result<(Vec<f64>, Vec<f64>)> {
        let ups = (0..clouds as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream(seed, UPSILON_FAMILY, i);
                upsilon(&sample_points(t, m / t, &mut rng)?, t, m, gamma, alpha)
            })
            .collect::<Result<Vec<_>>>()?;
        let sampler = ResidualSampler::new(t, m, gamma, alpha);
        let res = (0..clouds as u64)
            .into_par_iter()
            .map(|i| sampler.sample(&mut stream(seed, RESIDUAL_FAMILY, i)))
            .collect();
        Ok((ups, res))
    })?;
    let mc = central_moments(&res);
    let residual = (2..=4)
        .map(|p| {
            let e = &mc[p - 2];
            (p, exact[p], e.value, e.se)
        })
        .collect();
    Ok(MomentReport {
        t,
        m,
        gamma,
        alpha,
        clouds,
        mean_exact: upsilon_mean(t, m, gamma, alpha),
        mean_mc: mean_se(&ups),
        residual,
    })
}
