//! Paths `S_n = Σ_{0≤i<n} g_i X_{n−i}` of a (g,F)-process, the drifted
//! supremum `sup_{n≥1}(S_n − a·g_[0,n))`, its normalisation, and diagnostics
//! for the middle/extreme split and the exponential crossing bound.

use std::sync::Arc;

use rand::Rng;
use realfft::num_complex::Complex;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use crate::error::{Error, Result};
use crate::farima::{CoeffTable, GSpec};
use crate::innovations::{Decomposition, InnovationModel, Law};
use crate::regvar::ScalingFns;

/// Largest length convolved directly in `O(n²)`.
pub const DIRECT_MAX: usize = 1 << 12;
/// Innovations are drawn into the transform buffer this many at a time.
pub const CHUNK: usize = 1 << 14;

/// Source of innovations `X_1, X_2, …`.
pub trait InnovationStream {
    fn fill(&mut self, out: &mut [f64]);
}

/// I.i.d. draws from a model.
pub struct ModelStream<'a, R> {
    model: &'a InnovationModel,
    rng: R,
}

impl<'a, R: Rng> ModelStream<'a, R> {
    pub fn new(model: &'a InnovationModel, rng: R) -> Self {
        ModelStream { model, rng }
    }
}

impl<R: Rng> InnovationStream for ModelStream<'_, R> {
    fn fill(&mut self, out: &mut [f64]) {
        self.model.fill(&mut self.rng, out);
    }
}

/// `X_i ≡ value`.
pub struct ConstantStream(pub f64);

impl InnovationStream for ConstantStream {
    fn fill(&mut self, out: &mut [f64]) {
        out.fill(self.0);
    }
}

/// A fixed prefix followed by zeros.
pub struct SliceStream<'a> {
    data: &'a [f64],
    pos: usize,
}

impl<'a> SliceStream<'a> {
    pub fn new(data: &'a [f64]) -> Self {
        SliceStream { data, pos: 0 }
    }
}

impl InnovationStream for SliceStream<'_> {
    fn fill(&mut self, out: &mut [f64]) {
        let take = self.data.len().saturating_sub(self.pos).min(out.len());
        out[..take].copy_from_slice(&self.data[self.pos..self.pos + take]);
        out[take..].fill(0.0);
        self.pos += out.len();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Direct,
    Fft,
}

/// Convolution of `g_0..g_{n−1}` with innovation streams of length `n`.
///
/// The transform of `g` is computed once and shared by every path.
pub struct Convolver {
    n: usize,
    method: Method,
    g: Vec<f64>,
    fft: Option<FftPlan>,
}

struct FftPlan {
    len: usize,
    spectrum: Vec<Complex<f64>>,
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
}

/// Per-worker scratch buffers.
#[derive(Default)]
pub struct Workspace {
    input: Vec<f64>,
    output: Vec<f64>,
    spectrum: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
}

impl Convolver {
    pub fn new(coeffs: &CoeffTable, n: usize) -> Result<Self> {
        let method = if n <= DIRECT_MAX {
            Method::Direct
        } else {
            Method::Fft
        };
        Self::with_method(coeffs, n, method)
    }

    pub fn with_method(coeffs: &CoeffTable, n: usize, method: Method) -> Result<Self> {
        if n == 0 || n > coeffs.len() {
            return Err(Error::usage(format!(
                "path length {n} needs 1 ≤ n ≤ coefficient table length {}",
                coeffs.len()
            )));
        }
        let g = coeffs.coeffs()[..n].to_vec();
        let fft = match method {
            Method::Direct => None,
            Method::Fft => {
                let len = (2 * n).next_power_of_two();
                let mut planner = RealFftPlanner::<f64>::new();
                let forward = planner.plan_fft_forward(len);
                let inverse = planner.plan_fft_inverse(len);
                let mut buf = vec![0.0; len];
                buf[..n].copy_from_slice(&g);
                let mut spectrum = forward.make_output_vec();
                forward
                    .process(&mut buf, &mut spectrum)
                    .expect("buffer lengths match the plan");
                let scale = 1.0 / len as f64;
                for z in spectrum.iter_mut() {
                    *z *= scale;
                }
                Some(FftPlan {
                    len,
                    spectrum,
                    forward,
                    inverse,
                })
            }
        };
        Ok(Convolver { n, method, g, fft })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// Simulate `S_1..S_n` into the workspace and return it.
    pub fn simulate<'w, S: InnovationStream + ?Sized>(
        &self,
        stream: &mut S,
        ws: &'w mut Workspace,
    ) -> &'w [f64] {
        let n = self.n;
        match &self.fft {
            None => {
                ws.input.resize(n, 0.0);
                for chunk in ws.input.chunks_mut(CHUNK) {
                    stream.fill(chunk);
                }
                ws.output.resize(n, 0.0);
                let (x, g) = (&ws.input, &self.g);
                for (k, s) in ws.output.iter_mut().enumerate() {
                    // S_{k+1} = Σ_{i≤k} g_i X_{k+1−i}, X_j stored at j−1
                    let mut acc = 0.0;
                    for i in 0..=k {
                        acc += g[i] * x[k - i];
                    }
                    *s = acc;
                }
                &ws.output[..n]
            }
            Some(plan) => {
                ws.input.resize(plan.len, 0.0);
                for chunk in ws.input[..n].chunks_mut(CHUNK) {
                    stream.fill(chunk);
                }
                ws.input[n..].fill(0.0);
                ws.spectrum.resize(plan.len / 2 + 1, Complex::default());
                let need = plan
                    .forward
                    .get_scratch_len()
                    .max(plan.inverse.get_scratch_len());
                ws.scratch.resize(need, Complex::default());
                plan.forward
                    .process_with_scratch(&mut ws.input, &mut ws.spectrum, &mut ws.scratch)
                    .expect("buffer lengths match the plan");
                for (z, h) in ws.spectrum.iter_mut().zip(&plan.spectrum) {
                    *z *= h;
                }
                let last = ws.spectrum.len() - 1;
                ws.spectrum[0].im = 0.0;
                ws.spectrum[last].im = 0.0;
                ws.output.resize(plan.len, 0.0);
                plan.inverse
                    .process_with_scratch(&mut ws.spectrum, &mut ws.output, &mut ws.scratch)
                    .expect("buffer lengths match the plan");
                &ws.output[..n]
            }
        }
    }
}

/// One realised trajectory `S_1..S_{n_max}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub values: Vec<f64>,
}

/// Simulate a path of length `n_max` with a throwaway convolver.
pub fn simulate_path<S: InnovationStream + ?Sized>(
    coeffs: &CoeffTable,
    n_max: usize,
    stream: &mut S,
) -> Result<PathSample> {
    let conv = Convolver::new(coeffs, n_max)?;
    let mut ws = Workspace::default();
    Ok(PathSample {
        values: conv.simulate(stream, &mut ws).to_vec(),
    })
}

/// `sup_{1≤n≤n_max}(S_n − a g_[0,n))` and the first `n` attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupStat {
    pub sup: f64,
    pub argmax: usize,
    pub n_max: usize,
}

impl SupStat {
    /// Whether the argmax lies beyond `fraction · n_max`.
    pub fn near_horizon(&self, fraction: f64) -> bool {
        self.argmax as f64 > fraction * self.n_max as f64
    }
}

pub fn sup_statistic(path: &[f64], coeffs: &CoeffTable, a: f64) -> Result<SupStat> {
    if path.is_empty() {
        return Err(Error::usage("sup of an empty path"));
    }
    if path.len() > coeffs.len() {
        return Err(Error::usage("path longer than the coefficient table"));
    }
    if !(a >= 0.0) {
        return Err(Error::domain(format!(
            "drift scale a = {a} must be nonnegative"
        )));
    }
    let sums = coeffs.partial_sums();
    let (mut best, mut arg) = (f64::NEG_INFINITY, 0);
    for (i, (&s, &g)) in path.iter().zip(sums).enumerate() {
        let v = s - a * g;
        if v > best {
            best = v;
            arg = i + 1;
        }
    }
    Ok(SupStat {
        sup: best,
        argmax: arg,
        n_max: path.len(),
    })
}

/// Normaliser `a·g(1 − 1/Λ)` with `Λ = k^←(1/a)`.
pub fn normalizer(a: f64, spec: &GSpec, scaling: &ScalingFns) -> Result<f64> {
    let lambda = scaling.lambda(a)?;
    Ok(a * spec.g_near_one(lambda))
}

/// `sup / (a·g(1 − 1/k^←(1/a)))`.
pub fn scaled_sup(sup: f64, a: f64, spec: &GSpec, scaling: &ScalingFns) -> Result<f64> {
    Ok(sup / normalizer(a, spec, scaling)?)
}

/// Normaliser `a·g_[0,Λ) = g_[0,Λ)/k(Λ)` under which the scaled supremum
/// converges to `sup_t(L(t) − t^γ)` for the fractional stable limit `L`.
///
/// It differs from [`normalizer`] by a factor tending to `Γ(γ + 1)`.
pub fn partial_sum_normalizer(a: f64, coeffs: &CoeffTable, scaling: &ScalingFns) -> Result<f64> {
    let lambda = scaling.lambda(a)?;
    if lambda > coeffs.len() as f64 {
        return Err(Error::usage(format!(
            "Λ = {lambda} exceeds the coefficient table ({})",
            coeffs.len()
        )));
    }
    Ok(a * coeffs.partial_sum_at(lambda))
}

/// Simulation horizon `min(⌈C·Λ^{1+ε}⌉, ⌈cap·Λ⌉)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizonPolicy {
    pub epsilon: f64,
    pub multiplier: f64,
    pub warn_fraction: f64,
    /// Upper bound on the horizon in units of `Λ`.
    pub cap: Option<f64>,
}

impl Default for HorizonPolicy {
    fn default() -> Self {
        HorizonPolicy {
            epsilon: 0.5,
            multiplier: 1.0,
            warn_fraction: 0.9,
            cap: None,
        }
    }
}

const MAX_HORIZON: f64 = 1e10;

/// Ceiling that ignores relative noise below `1e−9` from the numeric inversion of `k`.
fn robust_ceil(x: f64) -> f64 {
    (x * (1.0 - 1e-9)).ceil()
}

impl HorizonPolicy {
    pub fn horizon(&self, a: f64, scaling: &ScalingFns) -> Result<usize> {
        let lambda = scaling.lambda(a)?;
        self.horizon_for_lambda(lambda)
    }

    pub fn horizon_for_lambda(&self, lambda: f64) -> Result<usize> {
        let mut h = robust_ceil(self.multiplier * lambda.powf(1.0 + self.epsilon));
        if let Some(cap) = self.cap {
            h = h.min(robust_ceil(cap * lambda));
        }
        if !(h.is_finite() && h <= MAX_HORIZON) {
            return Err(Error::config(format!(
                "horizon {h:e} for Λ = {lambda:e} is too large; reduce ε or raise a"
            )));
        }
        Ok((h as usize).max(1))
    }
}

/// Thresholds of the middle/extreme split at time `n`: `m_n = n^β`,
/// `b_n = F^←(1 − m_n/n)`, `a_n = −F^←(m_n/n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitThresholds {
    pub lower: f64,
    pub upper: f64,
    /// `E[X 1{−a_n ≤ X ≤ b_n}]`.
    pub middle_mean: f64,
}

pub const DEFAULT_SPLIT_BETA: f64 = 0.1;

pub fn split_thresholds(model: &InnovationModel, n: usize, beta: f64) -> Result<SplitThresholds> {
    if n < 2 || !(beta > 0.0 && beta < 1.0) {
        return Err(Error::domain(format!(
            "split thresholds need n ≥ 2 and 0 < β < 1 (n = {n}, β = {beta})"
        )));
    }
    let v = (n as f64).powf(beta) / n as f64;
    if v >= 0.5 {
        return Err(Error::domain(format!(
            "split thresholds cross at n = {n} (m_n/n = {v})"
        )));
    }
    Ok(SplitThresholds {
        lower: -model.quantile(v),
        upper: model.upper_quantile(v),
        middle_mean: model.quantile_integral(v, 1.0 - v),
    })
}

/// `S_n = M_n + T_n^+ + T_n^− + g_[0,n)·E[X 1{−a_n ≤ X ≤ b_n}]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiddleExtreme {
    pub middle: f64,
    pub upper: f64,
    pub lower: f64,
    pub drift: f64,
}

impl MiddleExtreme {
    pub fn total(&self) -> f64 {
        self.middle + self.upper + self.lower + self.drift
    }
}

/// Split `S_n` for `xs = (X_1, …, X_n)`.
pub fn middle_extreme_split(
    xs: &[f64],
    coeffs: &CoeffTable,
    th: &SplitThresholds,
) -> Result<MiddleExtreme> {
    let n = xs.len();
    if n == 0 || n > coeffs.len() {
        return Err(Error::usage("split: need 1 ≤ n ≤ coefficient table length"));
    }
    let mut out = MiddleExtreme {
        middle: 0.0,
        upper: 0.0,
        lower: 0.0,
        drift: coeffs.partial_sum(n) * th.middle_mean,
    };
    for i in 0..n {
        let (g, x) = (coeffs.coeffs()[i], xs[n - 1 - i]);
        // M_n = Σ g_i (X 1{−a_n ≤ X ≤ b_n} − E[X 1{−a_n ≤ X ≤ b_n}]) over every i
        if x > th.upper {
            out.upper += g * x;
            out.middle -= g * th.middle_mean;
        } else if x < -th.lower {
            out.lower += g * x;
            out.middle -= g * th.middle_mean;
        } else {
            out.middle += g * (x - th.middle_mean);
        }
    }
    Ok(out)
}

/// Moment generating function `φ(s) = r + (1 − r) φ_L(s)` of the lower part.
pub trait LowerMgf {
    fn phi(&self, s: f64) -> Result<f64>;
}

/// The law has no bounded-above component (`r = 1`).
pub struct NoLowerPart;

impl LowerMgf for NoLowerPart {
    fn phi(&self, _s: f64) -> Result<f64> {
        Ok(1.0)
    }
}

pub struct DecompositionMgf<'a, L> {
    pub decomp: &'a Decomposition,
    pub law: &'a L,
}

impl<L: Law> LowerMgf for DecompositionMgf<'_, L> {
    fn phi(&self, s: f64) -> Result<f64> {
        let r = self.decomp.r;
        Ok(r + (1.0 - r) * self.decomp.mgf_lower(self.law, s)?)
    }
}

/// `P(S_{L,n} > T g_[0,n)/k(Λ)) ≤ exp(−λT g_[0,n)/k(Λ) + Σ_{i<n} log φ(λ g_i))`
/// with `λ = k(n) log n / g_[0,n)`.
///
/// The `T`-independent part is computed once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChernoffBound {
    pub n: usize,
    pub lambda: f64,
    pub log_mgf_sum: f64,
    partial_sum: f64,
}

impl ChernoffBound {
    pub fn new<M: LowerMgf>(
        coeffs: &CoeffTable,
        mgf: &M,
        n: usize,
        scaling: &ScalingFns,
    ) -> Result<Self> {
        if n < 2 || n > coeffs.len() {
            return Err(Error::usage(format!(
                "Chernoff bound needs 2 ≤ n ≤ {}",
                coeffs.len()
            )));
        }
        let partial_sum = coeffs.partial_sum(n);
        let lambda = scaling.k(n as f64)? * (n as f64).ln() / partial_sum;
        let mut log_mgf_sum = 0.0;
        for &g in &coeffs.coeffs()[..n] {
            log_mgf_sum += mgf.phi(lambda * g)?.ln();
        }
        Ok(ChernoffBound {
            n,
            lambda,
            log_mgf_sum,
            partial_sum,
        })
    }

    /// Bound at level `T` with time scale `Λ` (through `k(Λ)`).
    pub fn bound(&self, t: f64, k_lambda: f64) -> f64 {
        (-self.lambda * t * self.partial_sum / k_lambda + self.log_mgf_sum).exp()
    }
}

pub fn chernoff_crossing_bound<M: LowerMgf>(
    coeffs: &CoeffTable,
    mgf: &M,
    n: usize,
    t: f64,
    lambda_scale: f64,
    scaling: &ScalingFns,
) -> Result<f64> {
    let k_lambda = scaling.k(lambda_scale)?;
    Ok(ChernoffBound::new(coeffs, mgf, n, scaling)?.bound(t, k_lambda))
}
