//! The heavy-traffic limit: Poisson series for spectrally positive stable
//! integrals, the truncated skeleton `Υ`, fractional Lévy stable paths
//! `L(t) = γ∫_0^t (t − u)^{γ−1} dL₀(u)` and `sup_t (L(t) − t^γ)`.
//!
//! Points `(V_i, W_i)` of a unit-intensity Poisson process on a strip carry
//! jumps `W_i^{−1/α}`. Paths keep every point with `W_i ≤ W_cut` exactly and
//! replace the compensated remainder by the Gaussian process with the same
//! covariance.

use std::sync::Arc;

use rand::distributions::Distribution;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::quad::{integrate, Tolerance};
use crate::rng::stream;
use crate::stats::{ks_two_sample, KsOutcome};

/// Poisson points on `[0, T_max] × [0, W_cut]`, ordered by `W`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub t_max: f64,
    pub w_cut: f64,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }
}

pub fn sample_points<R: Rng + ?Sized>(t_max: f64, w_cut: f64, rng: &mut R) -> Result<PointCloud> {
    if !(t_max > 0.0 && w_cut > 0.0) {
        return Err(Error::domain("point cloud needs T_max > 0 and W_cut > 0"));
    }
    let (mut v, mut w) = (Vec::new(), Vec::new());
    let mut level = 0.0;
    loop {
        let gap: f64 = Exp1.sample(rng);
        level += gap / t_max;
        if level > w_cut {
            break;
        }
        w.push(level);
        v.push(t_max * rng.gen::<f64>());
    }
    Ok(PointCloud { t_max, w_cut, v, w })
}

/// `Υ(t) = Σ (t − V_i)_+^{γ−1} W_i^{−1/α} 1{t W_i ≤ m}`.
pub fn upsilon(cloud: &PointCloud, t: f64, m: f64, gamma: f64, alpha: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    if !(t > 0.0 && t <= cloud.t_max) {
        return Err(Error::domain(format!(
            "Υ at t = {t} outside [0, {}]",
            cloud.t_max
        )));
    }
    if cloud.w_cut < m / t {
        return Err(Error::TruncationBias(format!(
            "cloud cut W = {} below m/t = {}",
            cloud.w_cut,
            m / t
        )));
    }
    let cut = m / t;
    Ok(cloud
        .v
        .iter()
        .zip(&cloud.w)
        .take_while(|(_, &w)| w <= cut)
        .filter(|(&v, _)| v < t)
        .map(|(&v, &w)| (t - v).powf(gamma - 1.0) * w.powf(-1.0 / alpha))
        .sum())
}

/// `E Υ(t) = t^{γ−1+1/α}/γ · m^{(α−1)/α} · α/(α−1)`.
pub fn upsilon_mean(t: f64, m: f64, gamma: f64, alpha: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    t.powf(gamma - 1.0 + 1.0 / alpha) / gamma * m.powf((alpha - 1.0) / alpha) * alpha
        / (alpha - 1.0)
}

/// Variance of the compensated remainder `Σ (t − V)^{γ−1} W^{−1/α} 1{tW > m}`:
/// `t^{2(γ−1+1/α)} m^{1−2/α} α/((2−α)(2γ−1))`.
pub fn truncation_m2(t: f64, m: f64, gamma: f64, alpha: f64) -> Result<f64> {
    if !(alpha < 2.0) || !(gamma > 0.5) {
        return Err(Error::domain(format!(
            "truncation variance is infinite for α = {alpha}, γ = {gamma} (needs α < 2, γ > 1/2)"
        )));
    }
    Ok(
        t.powf(2.0 * (gamma - 1.0 + 1.0 / alpha)) * m.powf(1.0 - 2.0 / alpha) * alpha
            / ((2.0 - alpha) * (2.0 * gamma - 1.0)),
    )
}

/// `∫∫ ((t − v)^{γ−1} w^{−1/α})^j 1{tw > m} dv dw` for `j > α`.
fn truncated_power_integral(j: u32, t: f64, m: f64, gamma: f64, alpha: f64) -> f64 {
    let jf = j as f64;
    let e = jf * (gamma - 1.0) + 1.0;
    t.powf(e) / e * alpha / (jf - alpha) * (m / t).powf((alpha - jf) / alpha)
}

/// Centered moments `M_0..M_{p_max}` of the truncation residual `Υ_m(t) − Υ_∞(t)`
/// (compensated), from `M_p = Σ_{k≤p−2} C(p−1,k) κ_{p−k} M_k` with cumulants
/// `κ_j = (−1)^j ∫∫ ((t − v)^{γ−1} w^{−1/α})^j 1{tw > m}`.
pub fn moment_recursion(p_max: usize, t: f64, m: f64, gamma: f64, alpha: f64) -> Result<Vec<f64>> {
    if p_max < 2 {
        return Err(Error::domain("moment recursion needs p_max ≥ 2"));
    }
    if !(alpha < 2.0) || !(gamma - 1.0 > -0.5) {
        return Err(Error::domain(format!(
            "cumulants diverge for α = {alpha}, γ = {gamma}"
        )));
    }
    let kappa: Vec<f64> = (0..=p_max as u32)
        .map(|j| {
            if j < 2 {
                0.0
            } else {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * truncated_power_integral(j, t, m, gamma, alpha)
            }
        })
        .collect();
    let mut moments = vec![1.0, 0.0];
    for p in 2..=p_max {
        let mut binom = 1.0; // C(p−1, k)
        let mut acc = 0.0;
        for k in 0..=p - 2 {
            acc += binom * kappa[p - k] * moments[k];
            binom *= (p - 1 - k) as f64 / (k + 1) as f64;
        }
        moments.push(acc);
    }
    Ok(moments)
}

/// Draws of the truncation residual at `(t, m)`.
///
/// Points with `m/t < w ≤ w_exact` are simulated exactly; the compensated sum
/// over `w > w_exact` is replaced by a normal variable with its exact variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualSampler {
    pub t: f64,
    pub m: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub w_exact: f64,
}

impl ResidualSampler {
    pub fn new(t: f64, m: f64, gamma: f64, alpha: f64) -> Self {
        ResidualSampler {
            t,
            m,
            gamma,
            alpha,
            w_exact: 1000.0 * (m / t).max(1.0),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let (t, g1, beta) = (self.t, self.gamma - 1.0, 1.0 / self.alpha);
        let lo = self.m / t;
        let mut w = lo;
        let mut sum = 0.0;
        loop {
            let gap: f64 = Exp1.sample(rng);
            w += gap / t;
            if w > self.w_exact {
                break;
            }
            let v = t * rng.gen::<f64>();
            sum += (t - v).powf(g1) * w.powf(-beta);
        }
        let mean = t.powf(self.gamma) / self.gamma
            * (self.w_exact.powf(1.0 - beta) - lo.powf(1.0 - beta))
            / (1.0 - beta);
        let tail_var = t.powf(2.0 * self.gamma - 1.0) / (2.0 * self.gamma - 1.0)
            * self.w_exact.powf(1.0 - 2.0 * beta)
            / (2.0 * beta - 1.0);
        let z: f64 = StandardNormal.sample(rng);
        -(sum - mean + tail_var.sqrt() * z)
    }
}

/// `T_max·W_cut` giving a truncation standard deviation of `rel_sd · E Υ` at
/// every `t` (the ratio does not depend on `t`).
pub fn truncation_level(gamma: f64, alpha: f64, rel_sd: f64) -> f64 {
    let k =
        (alpha / ((2.0 - alpha) * (2.0 * gamma - 1.0))).sqrt() / (alpha / (gamma * (alpha - 1.0)));
    (k / rel_sd).powi(2)
}

pub const DEFAULT_REL_SD: f64 = 0.01;

/// Default limit grid size.
pub const GRID_NODES: usize = 2048;

/// Default lower end of the geometric part of the grid.
pub const DEFAULT_T_MIN: f64 = 0.01;

/// `0`, then geometric on `[t_min, 1]`, then linear on `(1, T_max]`; a quarter
/// of the nodes are geometric.
pub fn limit_grid(t_min: f64, t_max: f64, nodes: usize) -> Result<Vec<f64>> {
    if !(t_max > 1.0) || nodes < 8 {
        return Err(Error::domain(
            "limit grid needs T_max > 1 and at least 8 nodes",
        ));
    }
    if !(t_min > 0.0 && t_min < 1.0) {
        return Err(Error::domain(format!(
            "limit grid needs 0 < t_min < 1, got {t_min}"
        )));
    }
    let geo = nodes / 4 - 1;
    let lin = nodes - 1 - geo;
    let mut grid = Vec::with_capacity(nodes);
    grid.push(0.0);
    let l0 = t_min.ln();
    for i in 0..geo {
        grid.push((l0 * (1.0 - i as f64 / (geo - 1) as f64)).exp());
    }
    for i in 1..=lin {
        grid.push(1.0 + (t_max - 1.0) * i as f64 / lin as f64);
    }
    *grid.last_mut().unwrap() = t_max;
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitParams {
    pub gamma: f64,
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub nodes: usize,
    /// Explicit cut; `None` applies the 1% rule.
    pub w_cut: Option<f64>,
    pub gaussian_residual: bool,
}

impl LimitParams {
    pub fn new(gamma: f64, alpha: f64, p: f64, q: f64) -> Self {
        LimitParams {
            gamma,
            alpha,
            p,
            q,
            t_min: DEFAULT_T_MIN,
            t_max: 50.0,
            nodes: GRID_NODES,
            w_cut: None,
            gaussian_residual: true,
        }
    }
}

/// Samples fractional Lévy stable paths on a fixed grid.
#[derive(Debug, Clone)]
pub struct LimitSampler {
    params: LimitParams,
    grid: Arc<[f64]>,
    w_cut: f64,
    /// `t^γ α/(α−1) W_cut^{(α−1)/α}` per node.
    compensator: Vec<f64>,
    drift: Vec<f64>,
    residual: Option<Residual>,
}

/// Packed lower Cholesky factor of the residual covariance on nodes `1..`.
#[derive(Debug, Clone)]
struct Residual {
    factor: Vec<f64>,
    dim: usize,
}

/// `∫_0^s (s − v)^{γ−1} (t − v)^{γ−1} dv` for `s ≤ t`, via `s − v = s z²`.
fn riemann_liouville_cov(s: f64, t: f64, gamma: f64) -> f64 {
    let e = gamma - 1.0;
    if s == t {
        return s.powf(2.0 * gamma - 1.0) / (2.0 * gamma - 1.0);
    }
    let d = t - s;
    let f = |z: f64| {
        let x = s * z * z;
        x.powf(e) * (d + x).powf(e) * 2.0 * s * z
    };
    integrate(f, 0.0, 1.0, Tolerance::new(1e-300, 1e-11)).value
}

fn packed(i: usize) -> usize {
    i * (i + 1) / 2
}

/// Cholesky of a packed symmetric matrix, scaled to unit diagonal first;
/// adds escalating diagonal jitter when the factorisation breaks down.
fn cholesky_packed(cov: &[f64], dim: usize) -> Result<Vec<f64>> {
    let d: Vec<f64> = (0..dim).map(|i| cov[packed(i) + i].sqrt()).collect();
    let mut jitter = 0.0;
    for _ in 0..12 {
        let mut l = vec![0.0; cov.len()];
        let mut ok = true;
        'rows: for i in 0..dim {
            let ri = packed(i);
            for j in 0..=i {
                let rj = packed(j);
                let mut acc = cov[ri + j] / (d[i] * d[j]);
                if i == j {
                    acc += jitter;
                }
                let (li, lj) = (&l[ri..ri + j], &l[rj..rj + j]);
                acc -= li.iter().zip(lj).map(|(a, b)| a * b).sum::<f64>();
                if i == j {
                    if !(acc > 0.0) {
                        ok = false;
                        break 'rows;
                    }
                    l[ri + i] = acc.sqrt();
                } else {
                    l[ri + j] = acc / l[rj + j];
                }
            }
        }
        if ok {
            for i in 0..dim {
                let ri = packed(i);
                for v in &mut l[ri..=ri + i] {
                    *v *= d[i];
                }
            }
            return Ok(l);
        }
        jitter = if jitter == 0.0 { 1e-13 } else { jitter * 10.0 };
    }
    Err(Error::Degenerate(
        "residual covariance is not positive definite".into(),
    ))
}

impl LimitSampler {
    pub fn new(params: LimitParams) -> Result<Self> {
        let LimitParams {
            gamma,
            alpha,
            p,
            q,
            t_min,
            t_max,
            nodes,
            ..
        } = params;
        if !(gamma >= 1.0) || !(alpha > 1.0 && alpha < 2.0) {
            return Err(Error::domain(format!(
                "limit process needs γ ≥ 1, 1 < α < 2 (γ = {gamma}, α = {alpha})"
            )));
        }
        if !(p > 0.0) || q < 0.0 || (p + q - 1.0).abs() > 1e-12 {
            return Err(Error::domain(
                "tail weights must satisfy p > 0, q ≥ 0, p + q = 1",
            ));
        }
        let level = truncation_level(gamma, alpha, DEFAULT_REL_SD);
        let w_cut = match params.w_cut {
            None => level / t_max,
            Some(w) => {
                if !(w * t_max >= level * (1.0 - 1e-12)) {
                    return Err(Error::config(format!(
                        "W_cut = {w} leaves a truncation sd above {}% of E Υ at T_max; use W_cut ≥ {}",
                        100.0 * DEFAULT_REL_SD,
                        level / t_max
                    )));
                }
                w
            }
        };
        let grid: Arc<[f64]> = limit_grid(t_min, t_max, nodes)?.into();
        let c = alpha / (alpha - 1.0) * w_cut.powf((alpha - 1.0) / alpha);
        let compensator = grid.iter().map(|t| c * t.powf(gamma)).collect();
        let drift = grid.iter().map(|t| t.powf(gamma)).collect();
        let residual = if params.gaussian_residual {
            let dim = grid.len() - 1;
            let nodes = &grid[1..];
            let sigma_w2 = w_cut.powf(1.0 - 2.0 / alpha) * alpha / (2.0 - alpha);
            let two_sided = p.powf(2.0 / alpha) + q.powf(2.0 / alpha);
            let scale = gamma * gamma * sigma_w2 * two_sided;
            let mut cov = vec![0.0; packed(dim)];
            for i in 0..dim {
                for j in 0..=i {
                    cov[packed(i) + j] = scale * riemann_liouville_cov(nodes[j], nodes[i], gamma);
                }
            }
            Some(Residual {
                factor: cholesky_packed(&cov, dim)?,
                dim,
            })
        } else {
            None
        };
        Ok(LimitSampler {
            params,
            grid,
            w_cut,
            compensator,
            drift,
            residual,
        })
    }

    pub fn params(&self) -> &LimitParams {
        &self.params
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn w_cut(&self) -> f64 {
        self.w_cut
    }

    /// Compensator `t^γ · α/(α−1) · W_cut^{(α−1)/α}` on the grid.
    pub fn compensator(&self) -> &[f64] {
        &self.compensator
    }

    /// One-sided compensated path `γ Σ (t − V)_+^{γ−1} W^{−1/α} − compensator`.
    fn one_sided<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> Result<()> {
        let cloud = sample_points(self.params.t_max, self.w_cut, rng)?;
        let beta = 1.0 / self.params.alpha;
        let mut pts: Vec<(f64, f64)> = cloud
            .v
            .iter()
            .zip(&cloud.w)
            .map(|(&v, &w)| (v, self.params.gamma * w.powf(-beta)))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let e = self.params.gamma - 1.0;
        let mut active = 0;
        for (j, &t) in self.grid.iter().enumerate() {
            while active < pts.len() && pts[active].0 < t {
                active += 1;
            }
            let live = &pts[..active];
            let s: f64 = if e == 0.5 {
                live.iter().map(|&(v, a)| (t - v).sqrt() * a).sum()
            } else if e == 0.0 {
                live.iter().map(|&(_, a)| a).sum()
            } else {
                live.iter().map(|&(v, a)| (t - v).powf(e) * a).sum()
            };
            out[j] = s - self.compensator[j];
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<LimitPath> {
        let n = self.grid.len();
        let (p, q, alpha) = (self.params.p, self.params.q, self.params.alpha);
        let mut values = vec![0.0; n];
        self.one_sided(rng, &mut values)?;
        let wp = p.powf(1.0 / alpha);
        for v in values.iter_mut() {
            *v *= wp;
        }
        if q > 0.0 {
            let mut lower = vec![0.0; n];
            self.one_sided(rng, &mut lower)?;
            let wq = q.powf(1.0 / alpha);
            for (v, l) in values.iter_mut().zip(&lower) {
                *v -= wq * l;
            }
        }
        if let Some(res) = &self.residual {
            let z: Vec<f64> = (0..res.dim).map(|_| StandardNormal.sample(rng)).collect();
            for i in 0..res.dim {
                let row = &res.factor[packed(i)..packed(i) + i + 1];
                values[i + 1] += row.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        values[0] = 0.0;
        Ok(LimitPath {
            grid: Arc::clone(&self.grid),
            values,
            drift: self.drift.clone(),
        })
    }
}

/// A sampled path of `L` on the sampler grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitPath {
    pub grid: Arc<[f64]>,
    pub values: Vec<f64>,
    drift: Vec<f64>,
}

impl LimitPath {
    /// Path with given values on a grid (drift `t^γ`).
    pub fn from_values(grid: Arc<[f64]>, values: Vec<f64>, gamma: f64) -> Self {
        let drift = grid.iter().map(|t| t.powf(gamma)).collect();
        LimitPath {
            grid,
            values,
            drift,
        }
    }
}

/// `sup_t (L(t) − t^γ)` over the grid, first maximiser.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitSup {
    pub sup: f64,
    pub argmax_t: f64,
    /// Argmax in the last 10% of the time range.
    pub near_boundary: bool,
}

pub fn limit_sup(path: &LimitPath) -> LimitSup {
    let (mut best, mut arg) = (f64::NEG_INFINITY, 0);
    for (j, (v, d)) in path.values.iter().zip(&path.drift).enumerate() {
        let x = v - d;
        if x > best {
            best = x;
            arg = j;
        }
    }
    let t_end = *path.grid.last().unwrap();
    LimitSup {
        sup: best,
        argmax_t: path.grid[arg],
        near_boundary: path.grid[arg] >= 0.9 * t_end,
    }
}

/// Two-sample KS between `{Υ(λt)}` and `{λ^{γ−1+1/α} Υ(t)}` per `t`, each
/// from `replicates` independent clouds.
pub fn upsilon_scaling_check(
    gamma: f64,
    alpha: f64,
    m: f64,
    lambda: f64,
    t_grid: &[f64],
    replicates: usize,
    seed: u64,
) -> Result<Vec<(f64, KsOutcome)>> {
    if !(lambda > 0.0) {
        return Err(Error::domain("scaling factor λ must be positive"));
    }
    let h = lambda.powf(gamma - 1.0 + 1.0 / alpha);
    t_grid
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let draw = |tt: f64, family: u64| -> Result<Vec<f64>> {
                (0..replicates as u64)
                    .map(|i| {
                        let mut rng = stream(seed, family, i);
                        let cloud = sample_points(tt, m / tt, &mut rng)?;
                        upsilon(&cloud, tt, m, gamma, alpha)
                    })
                    .collect()
            };
            let scaled = draw(lambda * t, 2 * k as u64)?;
            let base: Vec<f64> = draw(t, 2 * k as u64 + 1)?
                .into_iter()
                .map(|x| h * x)
                .collect();
            Ok((t, ks_two_sample(&scaled, &base)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::mean_se;

    #[test]
    fn closed_form_oracles() {
        assert!((upsilon_mean(1.0, 4.0, 1.5, 1.5) - 3.174_802_103_936_399).abs() < 1e-12);
        assert_eq!(upsilon_mean(0.0, 4.0, 1.5, 1.5), 0.0);
        for a in [1.2, 1.5, 1.8] {
            assert!((upsilon_mean(1.0, 1.0, 1.0, a) - a / (a - 1.0)).abs() < 1e-14);
        }
        let m2 = truncation_m2(1.0, 4.0, 1.5, 1.5).unwrap();
        assert!((m2 - 0.944_940_787_421_154_7).abs() < 1e-12);
        let r = truncation_m2(2.0, 4.0, 1.5, 1.5).unwrap() / m2;
        assert!((r - 2f64.powf(2.0 * (0.5 + 1.0 / 1.5))).abs() < 1e-12);
        assert!(truncation_m2(1.0, 1e12, 1.5, 1.5).unwrap() < 1e-3);
        assert!(truncation_m2(1.0, 4.0, 1.5, 2.0).is_err());
        assert!(truncation_m2(1.0, 4.0, 0.5, 1.5).is_err());
    }

    #[test]
    fn self_similar_mean() {
        for lam in [0.5f64, 2.0, 3.7] {
            let lhs = lam.powf(0.5 + 1.0 / 1.5) * upsilon_mean(0.4, 4.0, 1.5, 1.5);
            assert!((lhs / upsilon_mean(lam * 0.4, 4.0, 1.5, 1.5) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn recursion_base_cases() {
        let m = moment_recursion(6, 1.0, 4.0, 1.5, 1.5).unwrap();
        assert_eq!(m[0], 1.0);
        assert_eq!(m[1], 0.0);
        assert!((m[2] - truncation_m2(1.0, 4.0, 1.5, 1.5).unwrap()).abs() < 1e-14);
        // M_3 = κ_3, M_4 = κ_4 + 3κ_2²
        let i3 = 1.0 / 2.5 * 1.5 / 1.5 * 4f64.powf(-1.0);
        assert!((m[3] + i3).abs() < 1e-14);
        let i4 = 1.0 / 3.0 * 1.5 / 2.5 * 4f64.powf(-2.5 / 1.5);
        assert!((m[4] - (i4 + 3.0 * m[2] * m[2])).abs() < 1e-14);
        assert!(moment_recursion(1, 1.0, 4.0, 1.5, 1.5).is_err());
    }

    #[test]
    fn cloud_statistics() {
        let mut counts = Vec::new();
        let mut firsts = Vec::new();
        for i in 0..1000 {
            let c = sample_points(5.0, 2.0, &mut stream(3, 0, i)).unwrap();
            assert!(c.w.windows(2).all(|w| w[0] < w[1]));
            assert!(c.v.iter().all(|&v| (0.0..=5.0).contains(&v)));
            counts.push(c.len() as f64);
            if let Some(&w) = c.w.first() {
                firsts.push(w);
            }
        }
        let (mean, se) = mean_se(&counts);
        assert!((mean - 10.0).abs() < 4.0 * se);
        let (mean, se) = mean_se(&firsts);
        assert!((mean - 0.2).abs() < 4.0 * se);
    }

    #[test]
    fn upsilon_edge_cases() {
        let c = sample_points(2.0, 8.0, &mut stream(4, 0, 0)).unwrap();
        assert_eq!(upsilon(&c, 0.0, 4.0, 1.5, 1.5).unwrap(), 0.0);
        let empty = PointCloud {
            t_max: 2.0,
            w_cut: 8.0,
            v: vec![],
            w: vec![],
        };
        assert_eq!(upsilon(&empty, 1.0, 4.0, 1.5, 1.5).unwrap(), 0.0);
        assert!(matches!(
            upsilon(&c, 0.25, 4.0, 1.5, 1.5),
            Err(Error::TruncationBias(_))
        ));
    }

    #[test]
    fn truncation_rule() {
        let level = truncation_level(1.5, 1.5, 0.01);
        for t in [0.5, 1.0, 50.0] {
            let sd = truncation_m2(t, level, 1.5, 1.5).unwrap().sqrt();
            assert!((sd / upsilon_mean(t, level, 1.5, 1.5) - 0.01).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_shape() {
        let g = limit_grid(0.01, 50.0, 2048).unwrap();
        assert_eq!(g.len(), 2048);
        assert_eq!(g[0], 0.0);
        assert!((g[1] - 0.01).abs() < 1e-15);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*g.last().unwrap(), 50.0);
        assert!(g.contains(&1.0));
    }

    #[test]
    fn covariance_diagonal_and_symmetry() {
        // γ = 1: min(s, t)
        assert!((riemann_liouville_cov(0.3, 0.7, 1.0) - 0.3).abs() < 1e-12);
        // γ = 2: ∫_0^s (s−v)(t−v) dv = s²t/2 − s³/6
        let (s, t) = (0.4, 1.3);
        assert!(
            (riemann_liouville_cov(s, t, 2.0) - (s * s * t / 2.0 - s * s * s / 6.0)).abs() < 1e-12
        );
        let quad = riemann_liouville_cov(0.5, 0.5 + 1e-12, 1.5);
        assert!((quad - riemann_liouville_cov(0.5, 0.5, 1.5)).abs() < 1e-9);
    }

    #[test]
    fn cholesky_reproduces_matrix() {
        let g = [0.1, 0.5, 1.0, 2.0, 2.1];
        let dim = g.len();
        let mut cov = vec![0.0; packed(dim)];
        for i in 0..dim {
            for j in 0..=i {
                cov[packed(i) + j] = riemann_liouville_cov(g[j], g[i], 1.5);
            }
        }
        let l = cholesky_packed(&cov, dim).unwrap();
        for i in 0..dim {
            for j in 0..=i {
                let v: f64 = (0..=j).map(|k| l[packed(i) + k] * l[packed(j) + k]).sum();
                assert!((v - cov[packed(i) + j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn path_starts_at_zero_and_is_centered() {
        let mut params = LimitParams::new(1.5, 1.5, 1.0, 0.0);
        params.t_max = 5.0;
        params.nodes = 64;
        let sampler = LimitSampler::new(params).unwrap();
        let probe = [8usize, 32, 63];
        let mut vals = vec![Vec::new(); probe.len()];
        for i in 0..4000 {
            let path = sampler.sample(&mut stream(9, 0, i)).unwrap();
            assert_eq!(path.values[0], 0.0);
            for (k, &j) in probe.iter().enumerate() {
                vals[k].push(path.values[j]);
            }
        }
        for v in vals {
            let (mean, se) = mean_se(&v);
            assert!(mean.abs() < 4.0 * se, "{mean} ± {se}");
        }
    }

    #[test]
    fn spectrally_positive_without_residual() {
        let mut params = LimitParams::new(1.5, 1.5, 1.0, 0.0);
        params.t_max = 5.0;
        params.nodes = 64;
        params.gaussian_residual = false;
        let sampler = LimitSampler::new(params).unwrap();
        let path = sampler.sample(&mut stream(10, 0, 0)).unwrap();
        // uncompensated part is nonnegative
        for (v, c) in path.values.iter().zip(sampler.compensator()) {
            assert!(v + c >= -1e-12);
        }
    }

    #[test]
    fn explicit_cut_too_small() {
        let mut params = LimitParams::new(1.5, 1.5, 1.0, 0.0);
        params.w_cut = Some(1.0);
        assert!(matches!(LimitSampler::new(params), Err(Error::Config(_))));
    }

    #[test]
    fn zero_path_sup() {
        let grid: Arc<[f64]> = limit_grid(0.01, 10.0, 16).unwrap().into();
        let path = LimitPath::from_values(Arc::clone(&grid), vec![0.0; 16], 1.5);
        let s = limit_sup(&path);
        assert_eq!((s.sup, s.argmax_t, s.near_boundary), (0.0, 0.0, false));
    }
}
