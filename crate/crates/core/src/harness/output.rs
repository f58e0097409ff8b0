//! Result files. Numbers use the shortest round-trip decimal form, so equal
//! results give equal bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::experiment::{ExperimentResult, MomentReport};
use crate::error::{Error, Result};
use crate::fraclevy::LimitSup;

pub const SCALING_CSV: &str = "scaling.csv";
pub const LIMIT_CSV: &str = "limit.csv";
pub const SLOPE_TXT: &str = "slope.txt";
pub const SCALING_DAT: &str = "scaling.dat";
pub const REPLICATES_CSV: &str = "replicates.csv";
pub const WARNINGS_TXT: &str = "warnings.txt";

fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x}")
    }
}

pub fn scaling_csv(result: &ExperimentResult) -> String {
    let mut s = String::from("a,median,q10,q90,ks,n_eff\n");
    for r in &result.rows {
        let ks = r.ks.map_or(f64::NAN, |k| k.statistic);
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            num(r.a),
            num(r.median),
            num(r.q10),
            num(r.q90),
            num(ks),
            num(r.n_eff)
        );
    }
    s
}

pub fn limit_csv(sample: &[LimitSup]) -> String {
    let mut s = String::from("replicate,sup,argmax_t\n");
    for (i, l) in sample.iter().enumerate() {
        let _ = writeln!(s, "{i},{},{}", num(l.sup), num(l.argmax_t));
    }
    s
}

pub fn replicates_csv(result: &ExperimentResult) -> String {
    let mut s = String::from("replicate,a,sup,scaled_sup,argmax,horizon,warn\n");
    for r in result.replicates.iter().flatten() {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.replicate,
            num(r.a),
            num(r.sup),
            num(r.scaled_sup),
            r.argmax,
            r.horizon,
            u8::from(r.warn)
        );
    }
    s
}

pub fn slope_txt(result: &ExperimentResult) -> String {
    let (slope, se, points) = result
        .slope
        .map_or((f64::NAN, f64::NAN, 0), |f| (f.slope, f.slope_se, f.points));
    format!(
        "slope = {}\nslope_se = {}\npoints = {points}\ntarget = {}\n",
        num(slope),
        num(se),
        num(result.slope_target)
    )
}

/// Whitespace-separated table for gnuplot.
pub fn scaling_dat(result: &ExperimentResult) -> String {
    let mut s = String::from("# a lambda horizon median_raw median q10 q90 ks\n");
    for r in &result.rows {
        let ks = r.ks.map_or(f64::NAN, |k| k.statistic);
        let _ = writeln!(
            s,
            "{} {} {} {} {} {} {} {}",
            num(r.a),
            num(r.lambda),
            r.horizon,
            num(r.median_raw),
            num(r.median),
            num(r.q10),
            num(r.q90),
            num(ks)
        );
    }
    s
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Write every result file into `dir`, creating it if needed.
pub fn emit_outputs(result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut warnings = result.warnings.join("\n");
    if !warnings.is_empty() {
        warnings.push('\n');
    }
    [
        (SCALING_CSV, scaling_csv(result)),
        (LIMIT_CSV, limit_csv(&result.limit)),
        (SLOPE_TXT, slope_txt(result)),
        (SCALING_DAT, scaling_dat(result)),
        (REPLICATES_CSV, replicates_csv(result)),
        (WARNINGS_TXT, warnings),
    ]
    .iter()
    .map(|(name, body)| write_file(dir, name, body))
    .collect()
}

pub fn emit_moment_report(report: &MomentReport, dir: &Path) -> Result<PathBuf> {
    write_file(dir, "moments.txt", &report.to_text())
}
