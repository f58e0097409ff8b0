//! Coefficients of `g = (1 − x)^{−γ} Θ(x) / Φ(x)` and their partial sums.

use std::io::Write;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const ROOT_TOLERANCE: f64 = 1e-9;

/// FARIMA transfer function `(1 − x)^{−γ} Θ(x) / Φ(x)`.
///
/// Polynomials are stored lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct GSpec {
    gamma: f64,
    theta: Vec<f64>,
    phi: Vec<f64>,
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Smallest root modulus of a polynomial (lowest degree first), `∞` for constants.
fn min_root_modulus(coeffs: &[f64]) -> f64 {
    let mut c = coeffs.to_vec();
    while c.len() > 1 && *c.last().unwrap() == 0.0 {
        c.pop();
    }
    let d = c.len() - 1;
    if d == 0 {
        return f64::INFINITY;
    }
    let lead = c[d];
    let companion = DMatrix::from_fn(d, d, |i, j| {
        if i == 0 {
            -c[d - 1 - j] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    companion
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(f64::INFINITY, f64::min)
}

impl GSpec {
    pub fn new(gamma: f64, theta: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Construction(format!("γ = {gamma} must be positive")));
        }
        if theta.is_empty() || phi.is_empty() {
            return Err(Error::Construction(
                "Θ and Φ need at least one coefficient".into(),
            ));
        }
        if phi[0] == 0.0 {
            return Err(Error::Construction("Φ(0) = 0".into()));
        }
        if horner(&theta, 1.0) == 0.0 {
            return Err(Error::Construction("Θ(1) = 0".into()));
        }
        let r = min_root_modulus(&phi);
        if !(r > 1.0 + ROOT_TOLERANCE) {
            return Err(Error::Construction(format!(
                "Φ has a root of modulus {r} inside the closed unit disk"
            )));
        }
        Ok(GSpec { gamma, theta, phi })
    }

    /// Pure fractional integration, `Θ = Φ = 1`.
    pub fn fractional(gamma: f64) -> Result<Self> {
        Self::new(gamma, vec![1.0], vec![1.0])
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }
    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// `Θ(1)/Φ(1)`.
    pub fn arma_gain(&self) -> f64 {
        horner(&self.theta, 1.0) / horner(&self.phi, 1.0)
    }

    /// `g(x)` for `0 < x < 1`.
    pub fn g_at(&self, x: f64) -> f64 {
        (1.0 - x).powf(-self.gamma) * horner(&self.theta, x) / horner(&self.phi, x)
    }

    /// `g(1 − 1/s)`, evaluated without forming `1 − 1/s` inside the singular factor.
    pub fn g_near_one(&self, s: f64) -> f64 {
        let x = 1.0 - 1.0 / s;
        s.powf(self.gamma) * horner(&self.theta, x) / horner(&self.phi, x)
    }
}

/// Coefficients `g_0..g_{n−1}` with partial sums `g_[0,k)`.
#[derive(Debug, Clone)]
pub struct CoeffTable {
    g: Vec<f64>,
    /// `partial[k] = g_[0,k)`, `k = 0..=n`.
    partial: Vec<f64>,
}

/// Taylor coefficients of `g` up to order `n − 1`.
pub fn build_coeffs(spec: &GSpec, n: usize) -> Result<CoeffTable> {
    if n == 0 {
        return Err(Error::usage("build_coeffs: n must be at least 1"));
    }
    let gamma = spec.gamma;
    let mut b = vec![0.0; n];
    b[0] = 1.0;
    for i in 1..n {
        b[i] = b[i - 1] * (i as f64 - 1.0 + gamma) / i as f64;
    }
    let mut g = if spec.theta.len() == 1 && spec.theta[0] == 1.0 {
        b
    } else {
        (0..n)
            .map(|i| {
                spec.theta
                    .iter()
                    .enumerate()
                    .take(i + 1)
                    .map(|(j, &t)| t * b[i - j])
                    .sum()
            })
            .collect()
    };
    let phi = &spec.phi;
    if phi.len() > 1 || phi[0] != 1.0 {
        for i in 0..n {
            let mut acc = g[i];
            for j in 1..phi.len().min(i + 1) {
                acc -= phi[j] * g[i - j];
            }
            g[i] = acc / phi[0];
        }
    }
    let mut partial = Vec::with_capacity(n + 1);
    partial.push(0.0);
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for &x in &g {
        let y = x - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        partial.push(sum);
    }
    Ok(CoeffTable { g, partial })
}

impl CoeffTable {
    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.g
    }

    /// `g_i`, zero for negative `i`.
    pub fn g(&self, i: i64) -> f64 {
        if i < 0 {
            0.0
        } else {
            self.g[i as usize]
        }
    }

    /// `g_[0,k)` for `0 ≤ k ≤ len`.
    pub fn partial_sum(&self, k: usize) -> f64 {
        self.partial[k]
    }

    /// `g_[0,1), …, g_[0,n)`.
    pub fn partial_sums(&self) -> &[f64] {
        &self.partial[1..]
    }

    /// `g_[0,s)` at real `s ≥ 0`, interpolating linearly between integers.
    pub fn partial_sum_at(&self, s: f64) -> f64 {
        let k = (s.floor() as usize).min(self.len());
        let frac = s - k as f64;
        if k == self.len() || frac == 0.0 {
            self.partial[k]
        } else {
            self.partial[k] + frac * self.g[k]
        }
    }

    /// Write `i,g,G` rows with `G = g_[0,i+1)`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "i,g,G")?;
        for (i, (&g, &s)) in self.g.iter().zip(&self.partial[1..]).enumerate() {
            writeln!(out, "{i},{g:e},{s:e}")?;
        }
        Ok(())
    }
}

/// `γ·g_[0,n)/(n·g_{n−1})`; tends to 1 for regularly varying coefficients.
pub fn karamata_ratio(table: &CoeffTable, spec: &GSpec, n: usize) -> Result<f64> {
    if n == 0 || n > table.len() {
        return Err(Error::usage(format!(
            "karamata_ratio: n = {n} outside 1..={}",
            table.len()
        )));
    }
    let last = table.g[n - 1];
    if last == 0.0 {
        return Err(Error::Degenerate(format!("g_{} = 0", n - 1)));
    }
    Ok(spec.gamma * table.partial[n] / (n as f64 * last))
}

/// `n^δ · sup_{n^{1−δ} ≤ i ≤ n} |g_i/g_n − (i/n)^{γ−1}|`.
pub fn check_hyp_mg(table: &CoeffTable, spec: &GSpec, delta: f64, n: usize) -> Result<f64> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::domain(format!("δ = {delta} outside (0, 1/2)")));
    }
    if n == 0 || n >= table.len() {
        return Err(Error::usage(format!(
            "check_hyp_mg: need 1 ≤ n < {} (g_n is read)",
            table.len()
        )));
    }
    let nf = n as f64;
    let gn = table.g[n];
    let i0 = (nf.powf(1.0 - delta).ceil() as usize).max(1);
    let sup = (i0..=n)
        .map(|i| (table.g[i] / gn - (i as f64 / nf).powf(spec.gamma - 1.0)).abs())
        .fold(0.0, f64::max);
    Ok(nf.powf(delta) * sup)
}
