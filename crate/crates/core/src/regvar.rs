//! Regularly varying laws in the stable domain of attraction, the scaling
//! function `k(t) = t / F_*^←(1 − 1/t)` and its inverse, and numeric
//! witnesses for the quantile-rate and tail-form conditions.
//!
//! A [`QuantileModel`] is a two-sided Pareto law: with probability `p` an
//! upper Pareto branch whose quantile is `F^←(1 − 1/t) = c·t^{1/α}·P(t)`
//! (`P` a fixed perturbation family), with probability `q` a mirrored lower
//! branch `−σ (q/u)^{1/α}`, `σ = c·p^{−1/α}`. Without perturbation the upper
//! tail is exactly `(c/x)^α` and `|X|` has tail `(σ/x)^α`.

use crate::error::{Error, Result};

/// Multiplicative perturbation `P(t)` of the upper quantile `c·t^{1/α}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Perturbation {
    None,
    /// `P(t) = 1 + amplitude·t^{−exponent}`.
    Power {
        exponent: f64,
        amplitude: f64,
    },
    /// `P(t) = 1 + ln t`: slowly varying, violates the rate condition.
    Log,
}

impl Perturbation {
    #[inline]
    fn factor(&self, t: f64) -> f64 {
        match *self {
            Perturbation::None => 1.0,
            Perturbation::Power {
                exponent,
                amplitude,
            } => 1.0 + amplitude * t.powf(-exponent),
            Perturbation::Log => 1.0 + t.ln(),
        }
    }

    /// `∫ v^{−β} P(1/v) dv` antiderivative at `v > 0` (zero at `v = 0`).
    fn antiderivative(&self, beta: f64, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        let e = 1.0 - beta;
        let base = v.powf(e) / e;
        match *self {
            Perturbation::None => base,
            Perturbation::Power {
                exponent,
                amplitude,
            } => base + amplitude * v.powf(e + exponent) / (e + exponent),
            // ∫ v^{−β}(1 − ln v) dv = v^e/e − v^e ln v / e + v^e / e²
            Perturbation::Log => base - base * v.ln() + base / e,
        }
    }
}

/// Regularly varying law of index `−α`, `1 < α < 2`, with tail weights `p`, `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileModel {
    alpha: f64,
    scale: f64,
    upper_weight: f64,
    lower_weight: f64,
    perturbation: Perturbation,
}

impl QuantileModel {
    pub fn new(alpha: f64, scale: f64, upper_weight: f64, lower_weight: f64) -> Result<Self> {
        Self::with_perturbation(alpha, scale, upper_weight, lower_weight, Perturbation::None)
    }

    pub fn with_perturbation(
        alpha: f64,
        scale: f64,
        upper_weight: f64,
        lower_weight: f64,
        perturbation: Perturbation,
    ) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(Error::Construction(format!(
                "tail index {alpha} outside (1, 2)"
            )));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Construction(format!(
                "scale {scale} must be positive"
            )));
        }
        if !(upper_weight > 0.0)
            || lower_weight < 0.0
            || ((upper_weight + lower_weight) - 1.0).abs() > 1e-12
        {
            return Err(Error::Construction(format!(
                "tail weights p={upper_weight}, q={lower_weight} must satisfy p > 0, q ≥ 0, p + q = 1"
            )));
        }
        match perturbation {
            Perturbation::None | Perturbation::Log => {}
            Perturbation::Power {
                exponent,
                amplitude,
            } => {
                if !(exponent > 0.0) || amplitude < 0.0 {
                    return Err(Error::Construction(
                        "power perturbation needs exponent > 0 and amplitude ≥ 0".into(),
                    ));
                }
                // t^{1/α}(1 + A t^{−ε}) must increase from t = 1.
                if 1.0 / alpha + amplitude * (1.0 / alpha - exponent) <= 0.0 {
                    return Err(Error::Construction(
                        "power perturbation makes the quantile non-monotone".into(),
                    ));
                }
            }
        }
        Ok(QuantileModel {
            alpha,
            scale,
            upper_weight,
            lower_weight: 1.0 - upper_weight,
            perturbation,
        })
    }

    /// One-sided exact Pareto with `F̄(x) = (c/x)^α` on `[c, ∞)`.
    pub fn pareto(alpha: f64, scale: f64) -> Result<Self> {
        Self::new(alpha, scale, 1.0, 0.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn scale(&self) -> f64 {
        self.scale
    }
    pub fn upper_weight(&self) -> f64 {
        self.upper_weight
    }
    pub fn lower_weight(&self) -> f64 {
        self.lower_weight
    }
    pub fn perturbation(&self) -> Perturbation {
        self.perturbation
    }

    #[inline]
    fn beta(&self) -> f64 {
        1.0 / self.alpha
    }

    /// Scale of the mirrored branches, `σ = c·p^{−1/α}`.
    pub fn sigma(&self) -> f64 {
        self.scale * self.upper_weight.powf(-self.beta())
    }

    /// Upper quantile `F^←(1 − v)` for `0 < v < p`, evaluated from `v` directly.
    #[inline]
    pub fn upper_quantile(&self, v: f64) -> f64 {
        let t = 1.0 / v;
        self.scale * v.powf(-self.beta()) * self.perturbation.factor(t)
    }

    /// Lower quantile `F^←(u)` for `0 < u ≤ q`.
    #[inline]
    fn lower_quantile(&self, u: f64) -> f64 {
        -self.sigma() * (self.lower_weight / u).powf(self.beta())
    }

    /// Left-continuous quantile `F^←(u) = inf{x : F(x) ≥ u}`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::domain(format!("quantile level {u} outside (0, 1)")));
        }
        Ok(self.quantile_unchecked(u))
    }

    #[inline]
    pub(crate) fn quantile_unchecked(&self, u: f64) -> f64 {
        if u <= self.lower_weight {
            self.lower_quantile(u)
        } else {
            self.upper_quantile(1.0 - u)
        }
    }

    /// Left end of the upper branch, `F^←((q)+)`.
    pub fn upper_start(&self) -> f64 {
        self.upper_quantile(self.upper_weight)
    }

    /// Lower end of the support (`−∞` for two-sided laws).
    pub fn lower_endpoint(&self) -> f64 {
        if self.lower_weight > 0.0 {
            f64::NEG_INFINITY
        } else {
            self.upper_start()
        }
    }

    /// Solve `F^←(1 − v) = x` for `v ∈ (0, p]`, assuming `x ≥ upper_start`.
    fn upper_tail_level(&self, x: f64) -> f64 {
        if let Perturbation::None = self.perturbation {
            return (self.scale / x).powf(self.alpha);
        }
        // s = −ln v; g(s) = ln c + s/α + ln P(e^s) is increasing.
        let target = x.ln();
        let g = |s: f64| self.scale.ln() + s * self.beta() + self.perturbation.factor(s.exp()).ln();
        let mut lo = -self.upper_weight.ln();
        let mut hi = lo + 1.0;
        while g(hi) < target {
            hi = lo + 2.0 * (hi - lo);
            if hi > 1e4 {
                return 0.0;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (-0.5 * (lo + hi)).exp()
    }

    /// Upper tail `F̄(x) = P(X > x)`.
    pub fn tail(&self, x: f64) -> f64 {
        if x >= self.upper_start() {
            self.upper_tail_level(x)
        } else if self.lower_weight > 0.0 && x < -self.sigma() {
            1.0 - self.lower_weight * (self.sigma() / -x).powf(self.alpha)
        } else if self.lower_weight > 0.0 || x >= self.lower_endpoint() {
            self.upper_weight
        } else {
            1.0
        }
    }

    /// `P(X < −y)`, the tail of `−X`.
    pub fn lower_tail(&self, y: f64) -> f64 {
        if self.lower_weight == 0.0 {
            return self.cdf(-y);
        }
        let s = self.sigma();
        if y >= s {
            self.lower_weight * (s / y).powf(self.alpha)
        } else if y >= -self.upper_start() {
            self.lower_weight
        } else {
            1.0 - self.upper_tail_level(-y)
        }
    }

    /// Distribution function `F(x) = P(X ≤ x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        if self.lower_weight > 0.0 && x < -self.sigma() {
            self.lower_weight * (self.sigma() / -x).powf(self.alpha)
        } else {
            1.0 - self.tail(x)
        }
    }

    /// Tail of `|X|`, `F̄_*(x) = F̄(x) + P(X < −x)` for `x ≥ 0`.
    pub fn abs_tail(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 1.0;
        }
        (self.tail(x) + self.lower_tail(x)).min(1.0)
    }

    /// `F_*^←(1 − v)`, the upper quantile of `|X|`.
    pub fn abs_upper_quantile(&self, v: f64) -> f64 {
        if let Perturbation::None = self.perturbation {
            return self.sigma() * v.powf(-self.beta());
        }
        // bisection on ln x for abs_tail(x) = v, abs_tail decreasing
        let mut lo = self.upper_start().min(self.sigma()).ln() - 1.0;
        let mut hi = lo + 2.0;
        while self.abs_tail(hi.exp()) > v {
            hi += 2.0 * (hi - lo);
            if hi > 700.0 {
                return f64::INFINITY;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.abs_tail(mid.exp()) > v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi.exp()
    }

    /// `∫_{v_lo}^{v_hi} F^←(1 − v) dv` over the upper branch (`0 ≤ v_lo ≤ v_hi ≤ p`).
    pub fn upper_integral(&self, v_lo: f64, v_hi: f64) -> f64 {
        let b = self.beta();
        self.scale
            * (self.perturbation.antiderivative(b, v_hi)
                - self.perturbation.antiderivative(b, v_lo))
    }

    /// `∫_{u_lo}^{u_hi} F^←(u) du` over the lower branch (`0 ≤ u_lo ≤ u_hi ≤ q`).
    pub fn lower_integral(&self, u_lo: f64, u_hi: f64) -> f64 {
        if self.lower_weight == 0.0 {
            return 0.0;
        }
        let b = self.beta();
        let k = -self.sigma() * self.lower_weight.powf(b) / (1.0 - b);
        k * (u_hi.powf(1.0 - b) - u_lo.powf(1.0 - b))
    }

    /// `∫_{u_lo}^{u_hi} F^←(u) du` for `0 ≤ u_lo ≤ u_hi ≤ 1`, in closed form.
    pub fn quantile_integral(&self, u_lo: f64, u_hi: f64) -> f64 {
        let q = self.lower_weight;
        let mut total = 0.0;
        if u_lo < q {
            total += self.lower_integral(u_lo, u_hi.min(q));
        }
        if u_hi > q {
            let a = u_lo.max(q);
            total += self.upper_integral(1.0 - u_hi, 1.0 - a);
        }
        total
    }

    /// Mean of the law.
    pub fn mean(&self) -> f64 {
        self.upper_integral(0.0, self.upper_weight) + self.lower_integral(0.0, self.lower_weight)
    }
}

/// `k(t) = t / F_*^←(1 − 1/t)`.
pub fn k_fn(model: &QuantileModel, t: f64) -> Result<f64> {
    if !(t > 1.0) || !t.is_finite() {
        return Err(Error::domain(format!("k(t) needs t > 1, got {t}")));
    }
    Ok(t / model.abs_upper_quantile(1.0 / t))
}

/// The scaling bridge between time and space: `k`, `k^←` and `Λ = k^←(1/a)`.
///
/// Holds a table of `k` at 1024 geometric nodes; inversion brackets on the
/// table and refines by bisection on `log t`.
#[derive(Debug, Clone)]
pub struct ScalingFns {
    model: QuantileModel,
    nodes: Vec<(f64, f64)>,
    /// First table index from which `k` is increasing.
    increasing_from: usize,
}

const TABLE_NODES: usize = 1024;
const TABLE_T_MIN: f64 = 1.0 + 1e-6;
const TABLE_T_MAX: f64 = 1e18;

impl ScalingFns {
    pub fn new(model: QuantileModel) -> Self {
        let (l0, l1) = (TABLE_T_MIN.ln(), TABLE_T_MAX.ln());
        let nodes: Vec<(f64, f64)> = (0..TABLE_NODES)
            .map(|i| {
                let t = (l0 + (l1 - l0) * i as f64 / (TABLE_NODES - 1) as f64).exp();
                (t, k_fn(&model, t).expect("t > 1"))
            })
            .collect();
        let mut increasing_from = 0;
        for i in (0..TABLE_NODES - 1).rev() {
            if nodes[i].1 >= nodes[i + 1].1 {
                increasing_from = i + 1;
                break;
            }
        }
        ScalingFns {
            model,
            nodes,
            increasing_from,
        }
    }

    pub fn model(&self) -> &QuantileModel {
        &self.model
    }

    pub fn k(&self, t: f64) -> Result<f64> {
        k_fn(&self.model, t)
    }

    /// Smallest value `k^←` accepts.
    pub fn min_invertible(&self) -> f64 {
        self.nodes[self.increasing_from].1
    }

    /// `k^←(y)`: the `t` with `k(t) = y`, to `1e−12` relative in `k`.
    pub fn k_inverse(&self, y: f64) -> Result<f64> {
        let lo_k = self.min_invertible();
        let hi_k = self.nodes[TABLE_NODES - 1].1;
        if !(y >= lo_k) {
            return Err(Error::range(format!(
                "k^←({y}): below the increasing range of k (starts at {lo_k})"
            )));
        }
        if !(y <= hi_k) {
            return Err(Error::range(format!(
                "k^←({y}): beyond the tabulated range (max {hi_k})"
            )));
        }
        let tail = &self.nodes[self.increasing_from..];
        let j = tail.partition_point(|&(_, k)| k < y);
        if j < tail.len() && tail[j].1 == y {
            return Ok(tail[j].0);
        }
        let (mut lo, mut hi) = (
            tail[j.saturating_sub(1)].0.ln(),
            tail[j.min(tail.len() - 1)].0.ln(),
        );
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let k = self.k(mid.exp())?;
            if ((k - y) / y).abs() <= 1e-14 {
                return Ok(mid.exp());
            }
            if k < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((0.5 * (lo + hi)).exp())
    }

    /// `Λ = k^←(1/a)`, the time scale of the heavy-traffic limit.
    pub fn lambda(&self, a: f64) -> Result<f64> {
        if !(a > 0.0) {
            return Err(Error::domain(format!(
                "drift scale a = {a} must be positive"
            )));
        }
        self.k_inverse(1.0 / a)
    }
}

/// Default κ for the rate checks.
pub const DEFAULT_KAPPA: f64 = 0.1;
const LAMBDA_GRID: usize = 256;

/// `t^κ · sup_{t^{−κ} ≤ λ ≤ t^κ} |F^←(1 − λ/t)/F^←(1 − 1/t) − λ^{−1/α}|` per `t`.
///
/// The supremum is taken over 256 geometric points.
pub fn check_rv_rate(model: &QuantileModel, kappa: f64, t_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if t_grid.is_empty() {
        return Err(Error::usage("check_rv_rate: empty t grid"));
    }
    if !(kappa > 0.0) {
        return Err(Error::domain("check_rv_rate: κ must be positive"));
    }
    let beta = 1.0 / model.alpha;
    t_grid
        .iter()
        .map(|&t| {
            let lam_max = t.powf(kappa);
            if !(lam_max / t < model.upper_weight) {
                return Err(Error::domain(format!(
                    "check_rv_rate: t = {t} too small for κ = {kappa} (λ/t leaves the upper branch)"
                )));
            }
            let reference = model.upper_quantile(1.0 / t);
            let (l0, l1) = (-kappa * t.ln(), kappa * t.ln());
            let sup = (0..LAMBDA_GRID)
                .map(|i| {
                    let lam = (l0 + (l1 - l0) * i as f64 / (LAMBDA_GRID - 1) as f64).exp();
                    (model.upper_quantile(lam / t) / reference - lam.powf(-beta)).abs()
                })
                .fold(0.0, f64::max);
            Ok((t, lam_max * sup))
        })
        .collect()
}

/// `x^{κ(α+1)} · |F̄(x)(x/c)^α − 1|` per `x`.
pub fn check_tail_form(
    model: &QuantileModel,
    kappa: f64,
    x_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if x_grid.is_empty() {
        return Err(Error::usage("check_tail_form: empty x grid"));
    }
    let (a, c) = (model.alpha, model.scale);
    x_grid
        .iter()
        .map(|&x| {
            if !(x >= model.upper_start()) {
                return Err(Error::domain(format!(
                    "check_tail_form: x = {x} below the upper branch"
                )));
            }
            let dev = (model.tail(x) * (x / c).powf(a) - 1.0).abs();
            Ok((x, x.powf(kappa * (a + 1.0)) * dev))
        })
        .collect()
}

/// Tail balance deviations `(x, F̄(x)/F̄_*(x) − p, F̄_{−X}(x)/F̄_*(x) − q)`.
pub fn tail_balance(model: &QuantileModel, x_grid: &[f64]) -> Vec<(f64, f64, f64)> {
    x_grid
        .iter()
        .map(|&x| {
            let star = model.abs_tail(x);
            (
                x,
                model.tail(x) / star - model.upper_weight,
                model.lower_tail(x) / star - model.lower_weight,
            )
        })
        .collect()
}

/// Implied constant of the lower-tail dominance bound at `t`:
/// `F̄_{−X}(t) / (F̄(t log t) log t)`.
pub fn tail_dominance_ratio(model: &QuantileModel, t: f64) -> f64 {
    let l = t.ln();
    model.lower_tail(t) / (model.tail(t * l) * l)
}
