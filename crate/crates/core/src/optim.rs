//! The three optimizers over layered parameter vectors: classical SGD,
//! fixed-exponent fractional-order SGD (FOSGD), and the 2SED-adaptive
//! variant (2SEDFOSGD).
//!
//! Every run starts with one classical SGD step at rate μ₀, then applies
//! the selected method with the schedule μ_t = μ₀ / t^ρ. The fractional
//! step scales the gradient by (‖θ_t − θ_{t−1}‖ + δ)^{1−α} / Γ(2−α); the
//! adaptive variant lowers α per layer in proportion to that layer's 2SED
//! relative to the running maximum.

use std::collections::VecDeque;

use crate::error::{CoreError, Result};
use crate::fisher::{compute_2sed_windowed, FisherState, SedConfig, SedValue};
use crate::linalg::SymMatrix;
use crate::problems::ProblemHandle;
use crate::scalar::Scalar;
use crate::special::gamma;

/// Smallest fractional exponent the config validation admits, so that
/// α_t = α₀ − β·ratio stays strictly positive for any ratio in [0, 1].
pub const ALPHA_FLOOR: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Sgd,
    Fosgd,
    SedFosgd,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Sgd => "sgd",
            Method::Fosgd => "fosgd",
            Method::SedFosgd => "sed_fosgd",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sgd" => Ok(Method::Sgd),
            "fosgd" => Ok(Method::Fosgd),
            "sed_fosgd" => Ok(Method::SedFosgd),
            other => Err(CoreError::InvalidConfig(format!(
                "unknown method '{other}' (expected sgd | fosgd | sed_fosgd)"
            ))),
        }
    }
}

/// How the displacement |θ_t − θ_{t−1}| in the fractional multiplier is
/// read on vector layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisplacementMode {
    /// One Euclidean norm per layer (matches the convergence analysis).
    LayerNorm,
    /// Per-coordinate absolute differences, applied coordinatewise.
    Elementwise,
}

impl std::str::FromStr for DisplacementMode {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "layer_norm" => Ok(DisplacementMode::LayerNorm),
            "elementwise" => Ok(DisplacementMode::Elementwise),
            other => Err(CoreError::InvalidConfig(format!(
                "unknown displacement mode '{other}' (expected layer_norm | elementwise)"
            ))),
        }
    }
}

/// Optimizer hyperparameters shared by all methods.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig<T> {
    /// Base fractional order α₀ ∈ (0, 1].
    pub alpha0: T,
    /// Adaptation gain β ≥ 0; α₀ − β must stay above `ALPHA_FLOOR`.
    pub beta: T,
    /// Stall offset δ > 0 inside the fractional multiplier.
    pub delta: T,
    /// Base step size μ₀ > 0.
    pub mu0: T,
    /// Step-size decay exponent ρ ∈ (0.5, 1).
    pub rho: T,
    /// Fisher EMA decay γ ∈ (0, 1).
    pub gamma: T,
    /// 2SED knobs.
    pub sed: SedConfig<T>,
    pub displacement_mode: DisplacementMode,
    /// Whether the Fisher estimate is trace-normalized before 2SED.
    pub normalize_fisher: bool,
}

impl<T: Scalar> Default for OptimizerConfig<T> {
    /// Defaults calibrated on the AR(2) identification task: with δ ≥ 1
    /// the fractional base ‖Δθ‖ + δ never drops below one, so lowering α
    /// acts through 1/Γ(2−α) and speeds the adaptive method up instead of
    /// stalling it; μ₀ and ρ are sized so the Gaussian-noise run converges
    /// within 1400 steps without hot early transients.
    fn default() -> Self {
        Self {
            alpha0: T::from_f64_c(0.98),
            beta: T::from_f64_c(0.01),
            delta: T::from_f64_c(1.0),
            mu0: T::from_f64_c(0.10),
            rho: T::from_f64_c(0.55),
            gamma: T::from_f64_c(0.1),
            sed: SedConfig::default(),
            displacement_mode: DisplacementMode::LayerNorm,
            normalize_fisher: true,
        }
    }
}

impl<T: Scalar> OptimizerConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.alpha0 <= T::zero() || self.alpha0 > T::one() {
            return Err(CoreError::InvalidConfig(format!(
                "alpha0 must lie in (0, 1], got {}",
                self.alpha0
            )));
        }
        if self.beta < T::zero() {
            return Err(CoreError::InvalidConfig(format!(
                "beta must be nonnegative, got {}",
                self.beta
            )));
        }
        if self.alpha0 - self.beta < T::from_f64_c(ALPHA_FLOOR) {
            return Err(CoreError::InvalidConfig(format!(
                "alpha0 - beta = {} falls below the {} floor",
                self.alpha0 - self.beta,
                ALPHA_FLOOR
            )));
        }
        if self.delta <= T::zero() {
            return Err(CoreError::InvalidConfig(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if self.mu0 <= T::zero() {
            return Err(CoreError::InvalidConfig(format!(
                "mu0 must be positive, got {}",
                self.mu0
            )));
        }
        let half = T::from_f64_c(0.5);
        if self.rho <= half || self.rho >= T::one() {
            return Err(CoreError::InvalidConfig(format!(
                "rho must lie in (0.5, 1), got {}",
                self.rho
            )));
        }
        if self.gamma <= T::zero() || self.gamma >= T::one() {
            return Err(CoreError::InvalidConfig(format!(
                "gamma must lie in (0, 1), got {}",
                self.gamma
            )));
        }
        self.sed.validate()
    }

    /// μ_t = μ₀ / t^ρ for t ≥ 1; the t = 0 bootstrap step uses μ₀ itself.
    pub fn step_size(&self, t: u64) -> T {
        if t == 0 {
            self.mu0
        } else {
            self.mu0 / T::from_f64_c(t as f64).powf(self.rho)
        }
    }
}

/// Per-layer parameter vectors plus the previous iterate the fractional
/// multiplier differences against.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredParams<T> {
    layers: Vec<Vec<T>>,
    previous: Option<Vec<Vec<T>>>,
}

impl<T: Scalar> LayeredParams<T> {
    pub fn new(layers: Vec<Vec<T>>) -> Self {
        assert!(!layers.is_empty(), "need at least one layer");
        assert!(layers.iter().all(|l| !l.is_empty()), "layers must be nonempty");
        Self {
            layers,
            previous: None,
        }
    }

    pub fn layers(&self) -> &[Vec<T>] {
        &self.layers
    }

    pub fn previous(&self) -> Option<&[Vec<T>]> {
        self.previous.as_deref()
    }

    pub fn layer_dims(&self) -> Vec<usize> {
        self.layers.iter().map(Vec::len).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    fn check_shape(&self, gradient: &[Vec<T>]) -> Result<()> {
        if gradient.len() != self.layers.len() {
            return Err(CoreError::DimensionMismatch {
                expected: self.layers.len(),
                got: gradient.len(),
            });
        }
        for (l, g) in self.layers.iter().zip(gradient) {
            if l.len() != g.len() {
                return Err(CoreError::DimensionMismatch {
                    expected: l.len(),
                    got: g.len(),
                });
            }
        }
        Ok(())
    }
}

fn euclidean_diff<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x - y;
            d * d
        })
        .sum::<T>()
        .sqrt()
}

fn euclidean<T: Scalar>(a: &[T]) -> T {
    a.iter().map(|&x| x * x).sum::<T>().sqrt()
}

/// One classical SGD step: θ ← θ − μ·g per layer, previous rotated.
pub fn sgd_step<T: Scalar>(
    params: &mut LayeredParams<T>,
    gradient: &[Vec<T>],
    mu: T,
) -> Result<()> {
    params.check_shape(gradient)?;
    let old = params.layers.clone();
    for (layer, g) in params.layers.iter_mut().zip(gradient) {
        for (x, &gi) in layer.iter_mut().zip(g) {
            *x = *x - mu * gi;
        }
    }
    params.previous = Some(old);
    Ok(())
}

/// (displacement + δ)^{1−α} / Γ(2−α), the fractional step multiplier.
///
/// Exactly 1 when α = 1, which is what lets FOSGD collapse to classical
/// SGD bitwise.
pub fn fractional_multiplier<T: Scalar>(displacement: T, delta: T, alpha: T) -> T {
    debug_assert!(delta > T::zero());
    debug_assert!(alpha > T::zero() && alpha <= T::one());
    let exponent = T::one() - alpha;
    let gamma_den = gamma(T::from_f64_c(2.0) - alpha)
        .expect("2 - alpha lies in [1, 2) for alpha in (0, 1]");
    (displacement + delta).powf(exponent) / gamma_den
}

/// Everything recorded about one optimizer step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord<T> {
    pub t: u64,
    /// μ_t used by this step.
    pub mu: T,
    /// Per-layer fractional exponent (1 for the classical bootstrap/SGD).
    pub alpha: Vec<T>,
    /// Per-layer effective step μ_t·(‖Δθ‖+δ)^{1−α}/Γ(2−α), from the layer
    /// displacement norm.
    pub eta: Vec<T>,
    /// Smallest/largest scalar actually multiplied into a coordinate of
    /// this layer; both equal `eta` in layer-norm mode.
    pub eta_min: Vec<T>,
    pub eta_max: Vec<T>,
    /// Per-layer 2SED (adaptive method only).
    pub sed: Option<Vec<SedValue<T>>>,
    /// Running 2SED maximum after this step (adaptive method only).
    pub d_max: Option<T>,
    /// Per-layer gradient norm at the pre-step iterate.
    pub grad_norm: Vec<T>,
    /// Per-layer ‖θ_{t+1} − θ_t‖ produced by this step.
    pub step_norm: Vec<T>,
    /// Loss at the pre-step iterate.
    pub loss: T,
}

fn apply_fractional<T: Scalar>(
    params: &mut LayeredParams<T>,
    gradient: &[Vec<T>],
    mu: T,
    alphas: &[T],
    cfg: &OptimizerConfig<T>,
) -> Result<(Vec<T>, Vec<T>, Vec<T>, Vec<T>)> {
    params.check_shape(gradient)?;
    let previous = params
        .previous
        .as_ref()
        .ok_or(CoreError::UninitializedPrevious)?
        .clone();
    let old = params.layers.clone();

    let n_layers = params.layers.len();
    let mut eta = Vec::with_capacity(n_layers);
    let mut eta_min = Vec::with_capacity(n_layers);
    let mut eta_max = Vec::with_capacity(n_layers);
    let mut step_norm = Vec::with_capacity(n_layers);

    for (idx, (layer, g)) in params.layers.iter_mut().zip(gradient).enumerate() {
        let alpha = alphas[idx];
        let disp_norm = euclidean_diff(layer, &previous[idx]);
        let layer_eta = mu * fractional_multiplier(disp_norm, cfg.delta, alpha);
        match cfg.displacement_mode {
            DisplacementMode::LayerNorm => {
                for (x, &gi) in layer.iter_mut().zip(g) {
                    *x = *x - layer_eta * gi;
                }
                eta_min.push(layer_eta);
                eta_max.push(layer_eta);
            }
            DisplacementMode::Elementwise => {
                let mut lo = T::infinity();
                let mut hi = T::neg_infinity();
                for (i, (x, &gi)) in layer.iter_mut().zip(g).enumerate() {
                    let d = (*x - previous[idx][i]).abs();
                    let coeff = mu * fractional_multiplier(d, cfg.delta, alpha);
                    lo = lo.min(coeff);
                    hi = hi.max(coeff);
                    *x = *x - coeff * gi;
                }
                eta_min.push(lo);
                eta_max.push(hi);
            }
        }
        eta.push(layer_eta);
        step_norm.push(euclidean_diff(layer, &old[idx]));
    }
    params.previous = Some(old);
    Ok((eta, eta_min, eta_max, step_norm))
}

/// One fixed-exponent fractional step at iteration t ≥ 1.
pub fn fosgd_step<T: Scalar>(
    params: &mut LayeredParams<T>,
    gradient: &[Vec<T>],
    t: u64,
    cfg: &OptimizerConfig<T>,
    alpha_fixed: T,
) -> Result<StepRecord<T>> {
    if t < 1 {
        return Err(CoreError::InvalidConfig(
            "fractional steps start at t = 1".into(),
        ));
    }
    let mu = cfg.step_size(t);
    let n_layers = params.layers.len();
    let alphas = vec![alpha_fixed; n_layers];
    let grad_norm: Vec<T> = gradient.iter().map(|g| euclidean(g)).collect();
    let (eta, eta_min, eta_max, step_norm) = apply_fractional(params, gradient, mu, &alphas, cfg)?;
    Ok(StepRecord {
        t,
        mu,
        alpha: alphas,
        eta,
        eta_min,
        eta_max,
        sed: None,
        d_max: None,
        grad_norm,
        step_norm,
        loss: T::zero(),
    })
}

/// Mutable state the adaptive method threads through a run: per-layer
/// Fisher EMAs, the snapshot windows for the determinant average, and the
/// running 2SED maximum.
#[derive(Debug, Clone)]
pub struct SedDriver<T> {
    fisher: Vec<FisherState<T>>,
    windows: Vec<VecDeque<SymMatrix<T>>>,
    d_max: Option<T>,
}

impl<T: Scalar> SedDriver<T> {
    pub fn new(layer_dims: &[usize], cfg: &OptimizerConfig<T>) -> Result<Self> {
        let fisher = layer_dims
            .iter()
            .map(|&d| FisherState::new(d, cfg.gamma))
            .collect::<Result<_>>()?;
        Ok(Self {
            fisher,
            windows: vec![VecDeque::new(); layer_dims.len()],
            d_max: None,
        })
    }

    pub fn d_max(&self) -> Option<T> {
        self.d_max
    }

    pub fn fisher(&self) -> &[FisherState<T>] {
        &self.fisher
    }
}

/// One 2SED-adaptive fractional step at iteration t ≥ 1: Fisher update,
/// optional normalization, per-layer 2SED, running-max update, per-layer
/// α_t = α₀ − β · sed/d_max, then the fractional update.
pub fn sed_fosgd_step<T: Scalar>(
    params: &mut LayeredParams<T>,
    gradient: &[Vec<T>],
    t: u64,
    cfg: &OptimizerConfig<T>,
    driver: &mut SedDriver<T>,
) -> Result<StepRecord<T>> {
    if t < 1 {
        return Err(CoreError::InvalidConfig(
            "fractional steps start at t = 1".into(),
        ));
    }
    params.check_shape(gradient)?;
    if driver.fisher.len() != params.layers.len() {
        return Err(CoreError::DimensionMismatch {
            expected: params.layers.len(),
            got: driver.fisher.len(),
        });
    }

    let layer_dims = params.layer_dims();
    let mut seds = Vec::with_capacity(layer_dims.len());
    for (idx, g) in gradient.iter().enumerate() {
        driver.fisher[idx].update(g)?;
        let snapshot = if cfg.normalize_fisher {
            driver.fisher[idx].normalized(layer_dims[idx])
        } else {
            driver.fisher[idx].matrix().clone()
        };
        let window = &mut driver.windows[idx];
        window.push_back(snapshot);
        while window.len() > cfg.sed.mc_samples {
            window.pop_front();
        }
        let snaps: Vec<SymMatrix<T>> = window.iter().cloned().collect();
        seds.push(compute_2sed_windowed(&snaps, &cfg.sed, layer_dims[idx])?);
    }

    // Running max includes the current step, so the first adaptive step
    // scales its largest layer to a ratio of exactly one.
    let current_max = seds
        .iter()
        .map(|s| s.value)
        .fold(T::neg_infinity(), |a, b| a.max(b));
    let d_max = match driver.d_max {
        Some(prev) => prev.max(current_max),
        None => current_max,
    };
    driver.d_max = Some(d_max);

    let alphas: Vec<T> = seds
        .iter()
        .map(|s| {
            let ratio = if d_max > T::zero() {
                s.value / d_max
            } else {
                T::one()
            };
            cfg.alpha0 - cfg.beta * ratio
        })
        .collect();

    let mu = cfg.step_size(t);
    let grad_norm: Vec<T> = gradient.iter().map(|g| euclidean(g)).collect();
    let (eta, eta_min, eta_max, step_norm) = apply_fractional(params, gradient, mu, &alphas, cfg)?;
    Ok(StepRecord {
        t,
        mu,
        alpha: alphas,
        eta,
        eta_min,
        eta_max,
        sed: Some(seds),
        d_max: Some(d_max),
        grad_norm,
        step_norm,
        loss: T::zero(),
    })
}

/// Complete per-iteration record of one optimizer run.
#[derive(Debug, Clone)]
pub struct RunTrace<T> {
    pub method: Method,
    pub seed: u64,
    pub config: OptimizerConfig<T>,
    pub layer_dims: Vec<usize>,
    pub records: Vec<StepRecord<T>>,
    /// Parameter snapshot after each step.
    pub estimates: Vec<Vec<Vec<T>>>,
    /// Gradient evaluated at each pre-step iterate.
    pub gradients: Vec<Vec<Vec<T>>>,
    /// Reference parameters for error reporting, when the problem knows
    /// them.
    pub target: Option<Vec<Vec<T>>>,
    /// True when the problem's oracle is noise-free.
    pub deterministic: bool,
}

impl<T: Scalar> RunTrace<T> {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn final_estimates(&self) -> &[Vec<T>] {
        self.estimates.last().expect("trace has at least two steps")
    }

    /// |θ̂ᵢ − targetᵢ| per layer for a given iteration.
    pub fn abs_errors_at(&self, iteration: usize) -> Option<Vec<Vec<T>>> {
        let target = self.target.as_ref()?;
        Some(
            self.estimates[iteration]
                .iter()
                .zip(target)
                .map(|(est, tgt)| {
                    est.iter()
                        .zip(tgt)
                        .map(|(&e, &a)| (e - a).abs())
                        .collect()
                })
                .collect(),
        )
    }

    pub fn final_abs_errors(&self) -> Option<Vec<Vec<T>>> {
        self.abs_errors_at(self.estimates.len() - 1)
    }

    /// Per-layer mean of α_t over the trailing fraction of the run.
    pub fn mean_alpha_tail(&self, fraction: f64) -> Vec<T> {
        let n = self.records.len();
        let k = ((n as f64 * fraction).ceil() as usize).clamp(1, n);
        let tail = &self.records[n - k..];
        let layers = self.layer_dims.len();
        (0..layers)
            .map(|l| {
                tail.iter().map(|r| r.alpha[l]).sum::<T>() / T::from_f64_c(tail.len() as f64)
            })
            .collect()
    }

    /// Per-layer standard deviation of α_t over the trailing fraction.
    pub fn std_alpha_tail(&self, fraction: f64) -> Vec<T> {
        let n = self.records.len();
        let k = ((n as f64 * fraction).ceil() as usize).clamp(2, n);
        let tail = &self.records[n - k..];
        let means = self.mean_alpha_tail(fraction);
        let layers = self.layer_dims.len();
        (0..layers)
            .map(|l| {
                let var = tail
                    .iter()
                    .map(|r| {
                        let d = r.alpha[l] - means[l];
                        d * d
                    })
                    .sum::<T>()
                    / T::from_f64_c((tail.len() - 1) as f64);
                var.sqrt()
            })
            .collect()
    }

    /// (min, max) of the per-layer 2SED values over the run, when present.
    pub fn sed_range(&self) -> Option<(T, T)> {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        let mut seen = false;
        for r in &self.records {
            if let Some(seds) = &r.sed {
                for s in seds {
                    lo = lo.min(s.value);
                    hi = hi.max(s.value);
                    seen = true;
                }
            }
        }
        seen.then_some((lo, hi))
    }

    pub fn max_abs_estimate(&self) -> T {
        self.estimates
            .iter()
            .flatten()
            .flatten()
            .fold(T::zero(), |acc, &x| acc.max(x.abs()))
    }

    /// Bitwise equality of the realized trajectory: iterates, losses,
    /// per-layer steps, gradients and exponents. 2SED bookkeeping fields
    /// are deliberately excluded so reduction chains can be compared
    /// across methods.
    pub fn same_trajectory(&self, other: &Self) -> bool {
        if self.records.len() != other.records.len() {
            return false;
        }
        let bits = |x: T| x.to_f64().map(f64::to_bits);
        let vec_bits = |a: &[T], b: &[T]| {
            a.len() == b.len() && a.iter().zip(b).all(|(&x, &y)| bits(x) == bits(y))
        };
        let nested_bits = |a: &[Vec<T>], b: &[Vec<T>]| {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| vec_bits(x, y))
        };
        self.records.iter().zip(&other.records).all(|(r, s)| {
            r.t == s.t
                && bits(r.mu) == bits(s.mu)
                && bits(r.loss) == bits(s.loss)
                && vec_bits(&r.alpha, &s.alpha)
                && vec_bits(&r.eta, &s.eta)
                && vec_bits(&r.grad_norm, &s.grad_norm)
                && vec_bits(&r.step_norm, &s.step_norm)
        }) && self
            .estimates
            .iter()
            .zip(&other.estimates)
            .all(|(a, b)| nested_bits(a, b))
    }
}

/// Runs one optimizer end to end: a classical SGD bootstrap step followed
/// by t_max − 1 method steps, recording everything per iteration.
/// Deterministic given the problem's seed.
pub fn run_optimizer<T: Scalar>(
    mut problem: ProblemHandle<T>,
    method: Method,
    cfg: &OptimizerConfig<T>,
    t_max: u64,
    seed: u64,
) -> Result<RunTrace<T>> {
    if t_max < 2 {
        return Err(CoreError::InvalidConfig(format!(
            "t_max must be at least 2, got {t_max}"
        )));
    }
    cfg.validate()?;

    let mut params = LayeredParams::new(problem.initial().to_vec());
    let layer_dims = params.layer_dims();
    let n_layers = layer_dims.len();
    let mut driver = match method {
        Method::SedFosgd => Some(SedDriver::new(&layer_dims, cfg)?),
        _ => None,
    };

    let mut records = Vec::with_capacity(t_max as usize);
    let mut estimates = Vec::with_capacity(t_max as usize);
    let mut gradients = Vec::with_capacity(t_max as usize);

    // Bootstrap: classical SGD at μ₀.
    let (loss, grads) = problem.evaluate(params.layers(), 0)?;
    let grad_norm: Vec<T> = grads.iter().map(|g| euclidean(g)).collect();
    let old = params.layers().to_vec();
    sgd_step(&mut params, &grads, cfg.mu0)?;
    let step_norm: Vec<T> = params
        .layers()
        .iter()
        .zip(&old)
        .map(|(new, prev)| euclidean_diff(new, prev))
        .collect();
    records.push(StepRecord {
        t: 0,
        mu: cfg.mu0,
        alpha: vec![T::one(); n_layers],
        eta: vec![cfg.mu0; n_layers],
        eta_min: vec![cfg.mu0; n_layers],
        eta_max: vec![cfg.mu0; n_layers],
        sed: None,
        d_max: None,
        grad_norm,
        step_norm,
        loss,
    });
    estimates.push(params.layers().to_vec());
    gradients.push(grads);

    for t in 1..t_max {
        let (loss, grads) = problem.evaluate(params.layers(), t)?;
        let mut record = match method {
            Method::Sgd => {
                let mu = cfg.step_size(t);
                let grad_norm: Vec<T> = grads.iter().map(|g| euclidean(g)).collect();
                let old = params.layers().to_vec();
                sgd_step(&mut params, &grads, mu)?;
                let step_norm: Vec<T> = params
                    .layers()
                    .iter()
                    .zip(&old)
                    .map(|(new, prev)| euclidean_diff(new, prev))
                    .collect();
                StepRecord {
                    t,
                    mu,
                    alpha: vec![T::one(); n_layers],
                    eta: vec![mu; n_layers],
                    eta_min: vec![mu; n_layers],
                    eta_max: vec![mu; n_layers],
                    sed: None,
                    d_max: None,
                    grad_norm,
                    step_norm,
                    loss: T::zero(),
                }
            }
            Method::Fosgd => fosgd_step(&mut params, &grads, t, cfg, cfg.alpha0)?,
            Method::SedFosgd => {
                sed_fosgd_step(&mut params, &grads, t, cfg, driver.as_mut().unwrap())?
            }
        };
        record.loss = loss;
        records.push(record);
        estimates.push(params.layers().to_vec());
        gradients.push(grads);
    }

    Ok(RunTrace {
        method,
        seed,
        config: cfg.clone(),
        layer_dims,
        records,
        estimates,
        gradients,
        target: problem.target().map(<[Vec<T>]>::to_vec),
        deterministic: problem.is_deterministic(),
    })
}
