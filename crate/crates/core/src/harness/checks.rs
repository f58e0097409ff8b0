//! Diagnostics for the model assumptions of the heavy-traffic theorem.

use std::fmt;

use super::config::ExperimentConfig;
use crate::error::Result;
use crate::farima::{build_coeffs, check_hyp_mg, karamata_ratio};
use crate::innovations::{decompose_ul, mgf_check};
use crate::regvar::{check_rv_rate, check_tail_form, tail_balance, DEFAULT_KAPPA};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Warn,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckEntry {
    pub name: String,
    pub status: Status,
    /// Statistic at the largest argument checked.
    pub statistic: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConditionReport {
    pub entries: Vec<CheckEntry>,
}

impl ConditionReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.status == Status::Pass)
    }

    fn push(&mut self, name: &str, pass: bool, statistic: f64, detail: String) {
        self.entries.push(CheckEntry {
            name: name.into(),
            status: if pass { Status::Pass } else { Status::Warn },
            statistic,
            detail,
        });
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            let tag = match e.status {
                Status::Pass => "pass",
                Status::Warn => "warn",
            };
            writeln!(
                f,
                "{tag:<5} {:<22} {:<12.4e} {}",
                e.name, e.statistic, e.detail
            )?;
        }
        Ok(())
    }
}

const DELTAS: [f64; 3] = [0.1, 0.2, 0.3];
const SIZES: [usize; 2] = [1_000, 10_000];
/// Statistics this small count as decreasing regardless of rounding.
const EXACT: f64 = 1e-6;

fn shrinking(values: &[f64]) -> bool {
    values.last().is_some_and(|&l| l <= EXACT) || values.windows(2).all(|w| w[1] < w[0])
}

fn describe(pairs: &[(f64, f64)]) -> String {
    pairs
        .iter()
        .map(|(x, s)| format!("{x:.0e}:{s:.3e}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Coefficient, tail and lower-tail checks for the configured model.
///
/// A model that cannot be built (for example `Φ` with a root in the unit
/// disk) is refused with an error before any check runs.
pub fn run_condition_checks(cfg: &ExperimentConfig) -> Result<ConditionReport> {
    let model = cfg.build_model()?;
    let spec = &model.spec;
    let base = model.innovations.base();
    let mut report = ConditionReport::default();
    let table = build_coeffs(spec, SIZES[1] + 1)?;

    let kr: Vec<f64> = SIZES
        .iter()
        .map(|&n| karamata_ratio(&table, spec, n).map(|r| (r - 1.0).abs()))
        .collect::<Result<_>>()?;
    report.push(
        "karamata",
        shrinking(&kr),
        kr[1],
        format!(
            "|γG_n/(n g_n−1) − 1| at n = 1e3, 1e4: {:.3e} {:.3e}",
            kr[0], kr[1]
        ),
    );

    for delta in DELTAS {
        let hm: Vec<f64> = SIZES
            .iter()
            .map(|&n| check_hyp_mg(&table, spec, delta, n))
            .collect::<Result<_>>()?;
        report.push(
            &format!("coefficients δ={delta}"),
            shrinking(&hm),
            hm[1],
            format!("n = 1e3, 1e4: {:.3e} {:.3e}", hm[0], hm[1]),
        );
    }

    let t_grid = [1e3, 1e4, 1e5, 1e6, 1e8, 1e10];
    let rv = check_rv_rate(base, DEFAULT_KAPPA, &t_grid)?;
    let stats: Vec<f64> = rv.iter().map(|r| r.1).collect();
    report.push(
        "quantile rate",
        shrinking(&stats),
        stats[stats.len() - 1],
        describe(&rv),
    );

    let x0 = base.upper_start().max(base.scale()) * 10.0;
    let x_grid: Vec<f64> = (0..6).map(|i| x0 * 10f64.powi(2 * i)).collect();
    let tf = check_tail_form(base, DEFAULT_KAPPA, &x_grid)?;
    let stats: Vec<f64> = tf.iter().map(|r| r.1).collect();
    report.push(
        "tail form",
        shrinking(&stats),
        stats[stats.len() - 1],
        describe(&tf),
    );

    let tb = tail_balance(base, &x_grid);
    let dev: Vec<f64> = tb
        .iter()
        .map(|&(_, dp, dq)| dp.abs().max(dq.abs()))
        .collect();
    report.push(
        "tail balance",
        shrinking(&dev),
        dev[dev.len() - 1],
        describe(
            &x_grid
                .iter()
                .copied()
                .zip(dev.iter().copied())
                .collect::<Vec<_>>(),
        ),
    );

    let lambdas = [1e-2, 1e-3, 1e-4];
    match decompose_ul(&model.innovations)
        .and_then(|d| mgf_check(&d, &model.innovations, &lambdas, None))
    {
        Ok(rows) => {
            let worst = rows.iter().map(|r| r.lhs / r.rhs).fold(0.0, f64::max);
            let detail = rows
                .iter()
                .map(|r| format!("λ={:.0e}: {:.6} ≤ {:.6}", r.lambda, r.lhs, r.rhs))
                .collect::<Vec<_>>()
                .join(", ");
            report.push("lower mgf", worst <= 1.0 + 1e-9, worst, detail);
        }
        Err(e) => report.push("lower mgf", false, f64::NAN, e.to_string()),
    }
    Ok(report)
}
