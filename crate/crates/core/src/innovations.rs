//! Centered heavy-tailed innovation laws, the split `F = r F_U + (1 − r) F_L`
//! into a bounded-below and a bounded-above centered component, and the
//! moment-generating bound on `F_L`.
//!
//! Every computation is done in the probability domain through the quantile
//! function, so atoms and gaps in the support need no special casing: the
//! decomposition assigns to `F_U` the image under `F^←` of a subset of `(0, 1)`.

use rand::distributions::{Distribution, Open01};
use rand::Rng;

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_near_zero, Tolerance};
use crate::regvar::{Perturbation, QuantileModel};

/// A law on the real line seen through its quantile function.
pub trait Law {
    /// Left-continuous quantile `F^←(u)` for `0 < u < 1`.
    fn quantile(&self, u: f64) -> f64;
    /// Right limit `F^←(u+)`.
    fn quantile_right(&self, u: f64) -> f64;
    fn cdf(&self, x: f64) -> f64;
    /// `∫_a^b F^←(u) du`.
    fn quantile_integral(&self, a: f64, b: f64) -> f64;
    /// `∫_a^b f(F^←(u)) du`, where `f(F^←(u))` may blow up integrably at `u = 0`.
    fn expect_over<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    TwoSided,
    BoundedBelow(f64),
}

/// A [`QuantileModel`] shifted to mean zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnovationModel {
    base: QuantileModel,
    shift: f64,
}

impl InnovationModel {
    pub fn new(base: QuantileModel) -> Self {
        InnovationModel {
            shift: base.mean(),
            base,
        }
    }

    pub fn base(&self) -> &QuantileModel {
        &self.base
    }

    /// Centering shift `μ_c`, the mean of the uncentered law.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn support(&self) -> Support {
        if self.base.lower_weight() > 0.0 {
            Support::TwoSided
        } else {
            Support::BoundedBelow(self.base.lower_endpoint() - self.shift)
        }
    }

    /// `F^←(1 − v)`, accurate for small `v`.
    #[inline]
    pub fn upper_quantile(&self, v: f64) -> f64 {
        if v < self.base.upper_weight() {
            self.base.upper_quantile(v) - self.shift
        } else {
            self.base.quantile_unchecked(1.0 - v) - self.shift
        }
    }

    /// `P(X > x)`.
    pub fn tail(&self, x: f64) -> f64 {
        self.base.tail(x + self.shift)
    }

    /// `P(X < −y)`.
    pub fn lower_tail(&self, y: f64) -> f64 {
        self.base.cdf(self.shift - y)
    }

    /// One draw `F^←(1 − U)`.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let v: f64 = Open01.sample(rng);
        self.upper_quantile(v)
    }

    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        if self.base.lower_weight() == 0.0 && self.base.perturbation() == Perturbation::None {
            // one-sided exact Pareto: c·v^{−1/α} − μ_c
            let (c, b, s) = (self.base.scale(), -1.0 / self.base.alpha(), self.shift);
            for x in out.iter_mut() {
                let v: f64 = Open01.sample(rng);
                *x = c * v.powf(b) - s;
            }
        } else {
            for x in out.iter_mut() {
                *x = self.sample(rng);
            }
        }
    }

    /// Uncentered truncated mean `E[X' 1{X' > F'^←(1 − m/n)}]` of the law before the shift.
    pub fn mu_plus_raw(&self, n: f64, m: f64) -> Result<f64> {
        let v = Self::level(n, m)?;
        Ok(if v < self.base.upper_weight() {
            self.base.upper_integral(0.0, v)
        } else {
            self.base.quantile_integral(1.0 - v, 1.0)
        })
    }

    /// `μ_n^+ = E[X 1{X > F^←(1 − m/n)}]` for the centered law.
    pub fn mu_plus(&self, n: f64, m: f64) -> Result<f64> {
        let v = Self::level(n, m)?;
        Ok(self.mu_plus_raw(n, m)? - self.shift * v)
    }

    fn level(n: f64, m: f64) -> Result<f64> {
        if !(m > 0.0) || !(n > 0.0) {
            return Err(Error::domain(format!(
                "μ⁺: need m, n > 0 (m = {m}, n = {n})"
            )));
        }
        if m > n {
            return Err(Error::domain(format!("μ⁺: m = {m} exceeds n = {n}")));
        }
        Ok(m / n)
    }
}

impl Law for InnovationModel {
    fn quantile(&self, u: f64) -> f64 {
        self.base.quantile_unchecked(u) - self.shift
    }

    fn quantile_right(&self, u: f64) -> f64 {
        if u < self.base.lower_weight() {
            self.quantile(u)
        } else {
            self.base.upper_quantile(1.0 - u) - self.shift
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        self.base.cdf(x + self.shift)
    }

    fn quantile_integral(&self, a: f64, b: f64) -> f64 {
        self.base.quantile_integral(a, b) - self.shift * (b - a)
    }

    fn expect_over<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        if b <= a {
            return 0.0;
        }
        let q = self.base.lower_weight();
        if a < q && q < b {
            self.expect_piece(a, q, &f) + self.expect_piece(q, b, &f)
        } else {
            self.expect_piece(a, b, &f)
        }
    }
}

impl InnovationModel {
    fn expect_piece(&self, a: f64, b: f64, f: &dyn Fn(f64) -> f64) -> f64 {
        let tol = Tolerance::new(1e-14, 1e-12);
        let h = |u: f64| f(self.quantile_unchecked_centered(u));
        if a == 0.0 {
            integrate_near_zero(h, b, tol).value
        } else {
            integrate(h, a, b, tol).value
        }
    }

    #[inline]
    fn quantile_unchecked_centered(&self, u: f64) -> f64 {
        self.base.quantile_unchecked(u) - self.shift
    }
}

/// Finitely supported law `Σ w_k δ_{x_k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLaw {
    atoms: Vec<f64>,
    /// Cumulative weights, last entry 1.
    cumulative: Vec<f64>,
}

impl DiscreteLaw {
    pub fn new(mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() || atoms.iter().any(|&(x, w)| !(w > 0.0) || !x.is_finite()) {
            return Err(Error::Construction(
                "discrete law needs positive weights".into(),
            ));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Construction(format!("weights sum to {total}")));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut acc = 0.0;
        let cumulative = atoms
            .iter()
            .map(|&(_, w)| {
                acc += w;
                acc
            })
            .collect::<Vec<_>>();
        let mut cumulative = cumulative;
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(DiscreteLaw {
            atoms: atoms.into_iter().map(|a| a.0).collect(),
            cumulative,
        })
    }

    /// Mass `w_k` of the `k`-th atom over `(a, b]` in the probability domain.
    fn overlap(&self, k: usize, a: f64, b: f64) -> f64 {
        let lo = if k == 0 { 0.0 } else { self.cumulative[k - 1] };
        (b.min(self.cumulative[k]) - a.max(lo)).max(0.0)
    }
}

impl Law for DiscreteLaw {
    fn quantile(&self, u: f64) -> f64 {
        let k = self.cumulative.partition_point(|&c| c < u);
        self.atoms[k.min(self.atoms.len() - 1)]
    }

    fn quantile_right(&self, u: f64) -> f64 {
        let k = self.cumulative.partition_point(|&c| c <= u);
        self.atoms[k.min(self.atoms.len() - 1)]
    }

    fn cdf(&self, x: f64) -> f64 {
        let k = self.atoms.partition_point(|&a| a <= x);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }

    fn quantile_integral(&self, a: f64, b: f64) -> f64 {
        self.expect_over(a, b, |x| x)
    }

    fn expect_over<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        (0..self.atoms.len())
            .map(|k| {
                let w = self.overlap(k, a, b);
                if w > 0.0 {
                    w * f(self.atoms[k])
                } else {
                    0.0
                }
            })
            .sum()
    }
}

/// `F = r F_U + (1 − r) F_L` with `F_U` bounded below, `F_L` bounded above,
/// both centered.
///
/// In the probability domain `F_U` is the image of the uniform law on
/// `(u_2, u_0] ∪ (u_1, 1)` and `F_L` of the complement, with `u_0 = F(0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    pub theta: f64,
    pub r: f64,
    pub t1: f64,
    pub tau1: f64,
    pub t2: f64,
    pub tau2: f64,
    pub u0: f64,
    pub u1: f64,
    pub u2: f64,
}

/// Bisection for the level `u ∈ [lo, hi]` where the decreasing `h` crosses `target`.
fn solve_decreasing<H: Fn(f64) -> f64>(h: H, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Split a centered law into bounded-below and bounded-above centered parts.
///
/// `θ = A(0)/2` with `A(t) = ∫_{(t,∞)} x dF`; `t_1` and the atom fraction
/// `τ_1` satisfy `A(t_1) + τ_1 t_1 = θ`, and symmetrically `B(t_2) + τ_2 t_2 = −θ`
/// with `B(t) = ∫_{(t,0]} x dF`.
pub fn decompose_ul<L: Law>(law: &L) -> Result<Decomposition> {
    let u0 = law.cdf(0.0);
    let a0 = law.quantile_integral(u0, 1.0);
    if !(a0 > 0.0) || !(u0 > 0.0) {
        return Err(Error::Degenerate("law has no mass on one side of 0".into()));
    }
    let theta = 0.5 * a0;
    let u1 = solve_decreasing(|u| law.quantile_integral(u, 1.0), theta, u0, 1.0);
    // ∫_u^{u_0} F^← increases from −A(0) to 0 as u goes from 0 to u_0.
    let u2 = solve_decreasing(|u| -law.quantile_integral(u, u0), theta, 0.0, u0);
    let t1 = law.quantile(u1);
    let t2 = law.quantile_right(u2);
    let tau1 = (law.cdf(t1) - u1).max(0.0);
    let tau2 = (law.cdf(t2) - u2).max(0.0);
    let r = (u0 - u2) + (1.0 - u1);
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Degenerate(format!("decomposition weight r = {r}")));
    }
    Ok(Decomposition {
        theta,
        r,
        t1,
        tau1,
        t2,
        tau2,
        u0,
        u1,
        u2,
    })
}

impl Decomposition {
    /// `F_U(x)`.
    pub fn cdf_upper<L: Law>(&self, law: &L, x: f64) -> f64 {
        let f = law.cdf(x);
        ((f - self.u2).clamp(0.0, self.u0 - self.u2) + (f - self.u1).clamp(0.0, 1.0 - self.u1))
            / self.r
    }

    /// `F_L(x)`.
    pub fn cdf_lower<L: Law>(&self, law: &L, x: f64) -> f64 {
        (law.cdf(x) - self.r * self.cdf_upper(law, x)) / (1.0 - self.r)
    }

    pub fn mean_upper<L: Law>(&self, law: &L) -> f64 {
        (law.quantile_integral(self.u2, self.u0) + law.quantile_integral(self.u1, 1.0)) / self.r
    }

    pub fn mean_lower<L: Law>(&self, law: &L) -> f64 {
        (law.quantile_integral(0.0, self.u2) + law.quantile_integral(self.u0, self.u1))
            / (1.0 - self.r)
    }

    /// Moment generating function `φ_L(s) = ∫ e^{sx} dF_L`, `s ≥ 0`.
    pub fn mgf_lower<L: Law>(&self, law: &L, s: f64) -> Result<f64> {
        if s == 0.0 {
            return Ok(1.0);
        }
        if s * self.t1 > 700.0 {
            return Err(Error::Divergent(format!(
                "φ_L({s}) overflows (upper endpoint {})",
                self.t1
            )));
        }
        // F_L is centered, so subtract the linear term for accuracy at small s.
        let h = |x: f64| (s * x).exp_m1() - s * x;
        let total = law.expect_over(0.0, self.u2, h) + law.expect_over(self.u0, self.u1, h);
        Ok(1.0 + total / (1.0 - self.r))
    }
}

/// `∫_0^∞ (1 − e^{−u}) u^{−α} du` (equals `Γ(2 − α)/(α − 1)`).
pub fn mgf_integral(alpha: f64) -> f64 {
    let tol = Tolerance::new(1e-13, 1e-12);
    let near = integrate_near_zero(|u| -(-u).exp_m1() * u.powf(-alpha), 1.0, tol).value;
    // u = 1/s on [1, ∞)
    let far = integrate_near_zero(|s| -(-1.0 / s).exp_m1() * s.powf(alpha - 2.0), 1.0, tol).value;
    near + far
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgfRow {
    pub lambda: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// Constant `c` used in `D(t)`.
    pub c: f64,
}

/// Compare `φ_L(λ)` with `1 + D(1/λ)·∫(1 − e^{−u})u^{−α}du`,
/// `D(t) = c/(1 − r)·F̄(t log t)·log t`.
///
/// Without an explicit `c`, the implied ratio `P(X < −t)/(F̄(t log t) log t)`
/// at `t = 1/λ` is used (1 when the lower tail vanishes there).
pub fn mgf_check(
    decomp: &Decomposition,
    model: &InnovationModel,
    lambdas: &[f64],
    c: Option<f64>,
) -> Result<Vec<MgfRow>> {
    let ia = mgf_integral(model.base().alpha());
    lambdas
        .iter()
        .map(|&lambda| {
            if !(lambda > 0.0) {
                return Err(Error::domain(format!(
                    "mgf_check: λ = {lambda} must be positive"
                )));
            }
            let t = 1.0 / lambda;
            let lt = t.ln();
            let scale = model.tail(t * lt) * lt;
            let c = c.unwrap_or_else(|| {
                let implied = model.lower_tail(t) / scale;
                if implied > 0.0 {
                    implied
                } else {
                    1.0
                }
            });
            let d = c / (1.0 - decomp.r) * scale;
            Ok(MgfRow {
                lambda,
                lhs: decomp.mgf_lower(model, lambda)?,
                rhs: 1.0 + d * ia,
                c,
            })
        })
        .collect()
}
