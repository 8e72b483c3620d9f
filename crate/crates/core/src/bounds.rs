//! Runtime verification of the convergence analysis: the constants are
//! instantiated from observed run quantities and every inequality the
//! theory asserts is checked against the recorded trace.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::fisher::SedConfig;
use crate::optim::RunTrace;
use crate::scalar::Scalar;
use crate::special::gamma_extrema_on_unit_interval;

/// Minimum seeds per horizon for the rate check.
pub const MIN_RATE_SEEDS: usize = 20;

/// Slack allowed on the fitted log-log slope of the rate check; Monte
/// Carlo noise at small scale makes exact exponent matching unrealistic.
pub const RATE_SLOPE_SLACK: f64 = 0.15;

/// Window length for the moving-mean gradient-variance proxy.
const SIGMA_WINDOW: usize = 50;

/// Constants of the analysis instantiated from one run's observations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundContext<T> {
    /// Max observed per-layer gradient norm.
    pub g_obs: T,
    /// Gradient-variance proxy: sample variance of gradient components
    /// around their 50-step moving mean.
    pub sigma2_obs: T,
    /// Max observed per-layer displacement.
    pub r_delta_obs: T,
    /// True extrema of Γ on [1, 2].
    pub c_gamma: T,
    pub cap_gamma: T,
    /// Extrema of (‖Δθ‖ + δ)^{1−α} over the run's realized α-range and
    /// displacement range. Because the base may sit on either side of 1,
    /// both exponent endpoints are tried and the true min/max kept.
    pub c_delta: T,
    pub cap_delta: T,
    /// Realized fractional-exponent range over the run.
    pub alpha_min: T,
    pub alpha_max: T,
    /// Secant estimate of the gradient Lipschitz constant.
    pub l_est: T,
    /// Best observed loss.
    pub f_min_est: T,
}

impl<T: Scalar> BoundContext<T> {
    pub fn from_trace(trace: &RunTrace<T>) -> Self {
        let delta = trace.config.delta;

        let mut g_obs = T::zero();
        let mut r_delta_obs = T::zero();
        let mut f_min_est = T::infinity();
        for rec in &trace.records {
            for &gn in &rec.grad_norm {
                g_obs = g_obs.max(gn);
            }
            for &sn in &rec.step_norm {
                r_delta_obs = r_delta_obs.max(sn);
            }
            f_min_est = f_min_est.min(rec.loss);
        }

        // Realized α-range over the fractional steps (the bootstrap is a
        // classical step and carries α = 1 by convention).
        let mut alpha_min = T::infinity();
        let mut alpha_max = T::neg_infinity();
        for rec in &trace.records[1..] {
            for &a in &rec.alpha {
                alpha_min = alpha_min.min(a);
                alpha_max = alpha_max.max(a);
            }
        }

        let one = T::one();
        let e_lo = one - alpha_max;
        let e_hi = one - alpha_min;
        let c_delta = delta.powf(e_lo).min(delta.powf(e_hi));
        let base = delta + r_delta_obs;
        let cap_delta = base.powf(e_lo).max(base.powf(e_hi));

        let (c_gamma, cap_gamma) = gamma_extrema_on_unit_interval::<T>();

        Self {
            g_obs,
            sigma2_obs: gradient_variance_proxy(trace),
            r_delta_obs,
            c_gamma,
            cap_gamma,
            c_delta,
            cap_delta,
            alpha_min,
            alpha_max,
            l_est: lipschitz_secant_estimate(trace),
            f_min_est,
        }
    }

    /// The bounded-iterates radius R_Δ = μ₀ (C_Δ / c_Γ) √(σ² + G²),
    /// instantiated with the observed quantities.
    pub fn displacement_radius(&self, mu0: T) -> T {
        mu0 * (self.cap_delta / self.c_gamma) * (self.sigma2_obs + self.g_obs * self.g_obs).sqrt()
    }
}

fn gradient_variance_proxy<T: Scalar>(trace: &RunTrace<T>) -> T {
    let mut sum_sq = T::zero();
    let mut count = 0usize;
    for l in 0..trace.layer_dims.len() {
        for i in 0..trace.layer_dims[l] {
            let series: Vec<T> = trace.gradients.iter().map(|g| g[l][i]).collect();
            for (t, &x) in series.iter().enumerate() {
                let start = t.saturating_sub(SIGMA_WINDOW - 1);
                let window = &series[start..=t];
                let mean = window.iter().copied().sum::<T>()
                    / T::from_f64_c(window.len() as f64);
                let d = x - mean;
                sum_sq += d * d;
                count += 1;
            }
        }
    }
    if count > 1 {
        sum_sq / T::from_f64_c((count - 1) as f64)
    } else {
        T::zero()
    }
}

fn lipschitz_secant_estimate<T: Scalar>(trace: &RunTrace<T>) -> T {
    let mut l_est = T::zero();
    for w in 0..trace.estimates.len().saturating_sub(1) {
        let mut dg = T::zero();
        let mut dx = T::zero();
        for l in 0..trace.layer_dims.len() {
            for i in 0..trace.layer_dims[l] {
                let g = trace.gradients[w + 1][l][i] - trace.gradients[w][l][i];
                let x = trace.estimates[w + 1][l][i] - trace.estimates[w][l][i];
                dg += g * g;
                dx += x * x;
            }
        }
        if dx > T::zero() {
            l_est = l_est.max((dg / dx).sqrt());
        }
    }
    l_est
}

/// Outcome of one registered inequality check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub holds: bool,
    /// Minimum margin of the inequality over the run (negative when the
    /// check fails; NaN slack counts as failure).
    pub slack: f64,
    /// Iteration index attaining the minimum margin, when applicable.
    pub worst_iteration: Option<u64>,
}

impl BoundCheck {
    fn from_margins(name: &str, margins: impl IntoIterator<Item = (u64, f64)>) -> Self {
        let mut worst: Option<(u64, f64)> = None;
        for (t, slack) in margins {
            let current = worst.map(|(_, s)| s).unwrap_or(f64::INFINITY);
            // NaN counts as the worst possible margin
            if slack.is_nan() {
                worst = Some((t, f64::NEG_INFINITY));
                break;
            }
            if slack < current {
                worst = Some((t, slack));
            }
        }
        match worst {
            Some((t, slack)) => Self {
                name: name.into(),
                holds: slack >= 0.0,
                slack,
                worst_iteration: Some(t),
            },
            None => Self {
                name: name.into(),
                holds: true,
                slack: f64::INFINITY,
                worst_iteration: None,
            },
        }
    }
}

/// All registered checks for one run (plus, separately, the rate check
/// over a family of runs).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub checks: Vec<BoundCheck>,
}

impl BoundReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn get(&self, name: &str) -> Option<&BoundCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Every recorded displacement stays below R_Δ.
pub fn check_bounded_iterates<T: Scalar>(trace: &RunTrace<T>, ctx: &BoundContext<T>) -> BoundCheck {
    let r_delta = ctx
        .displacement_radius(trace.config.mu0)
        .to_f64()
        .unwrap_or(f64::NAN);
    let margins = trace.records.iter().flat_map(|rec| {
        rec.step_norm.iter().map(move |&sn| {
            let sn = sn.to_f64().unwrap_or(f64::NAN);
            (rec.t, r_delta - sn)
        })
    });
    BoundCheck::from_margins("bounded_iterates", margins)
}

/// Every recorded 2SED value stays below the finite cap
/// ζ dⱼ + (1−ζ) dⱼ log(1 + ε^{−ξ}√(G²+σ²)) / (ξ |log ε|).
pub fn check_sed_bound<T: Scalar>(
    trace: &RunTrace<T>,
    ctx: &BoundContext<T>,
    sed: &SedConfig<T>,
) -> BoundCheck {
    let energy = (ctx.g_obs * ctx.g_obs + ctx.sigma2_obs).sqrt();
    let caps: Vec<f64> = trace
        .layer_dims
        .iter()
        .map(|&d| {
            let d = T::from_f64_c(d as f64);
            let curv_cap = d * (T::one() + sed.eigen_scale() * energy).ln() / sed.log_denominator();
            (sed.zeta * d + (T::one() - sed.zeta) * curv_cap)
                .to_f64()
                .unwrap_or(f64::NAN)
        })
        .collect();
    let margins = trace.records.iter().flat_map(|rec| {
        let caps = &caps;
        rec.sed
            .iter()
            .flat_map(|seds| seds.iter().enumerate())
            .map(move |(l, s)| {
                let v = s.value.to_f64().unwrap_or(f64::NAN);
                (rec.t, caps[l] - v)
            })
    });
    BoundCheck::from_margins("sed_bound", margins)
}

/// Every realized per-coordinate effective step η lies inside
/// [μ_t c_Δ / C_Γ, μ_t C_Δ / c_Γ]. Applies to the fractional steps; the
/// bootstrap is a classical step outside the envelope's scope.
pub fn check_step_envelope<T: Scalar>(trace: &RunTrace<T>, ctx: &BoundContext<T>) -> BoundCheck {
    let lo_coeff = (ctx.c_delta / ctx.cap_gamma).to_f64().unwrap_or(f64::NAN);
    let hi_coeff = (ctx.cap_delta / ctx.c_gamma).to_f64().unwrap_or(f64::NAN);
    let margins = trace.records[1..].iter().flat_map(|rec| {
        let mu = rec.mu.to_f64().unwrap_or(f64::NAN);
        rec.eta_min
            .iter()
            .zip(&rec.eta_max)
            .map(move |(&emin, &emax)| {
                let emin = emin.to_f64().unwrap_or(f64::NAN);
                let emax = emax.to_f64().unwrap_or(f64::NAN);
                let lower_margin = emin - mu * lo_coeff;
                let upper_margin = mu * hi_coeff - emax;
                (rec.t, lower_margin.min(upper_margin))
            })
    });
    BoundCheck::from_margins("step_envelope", margins)
}

/// Per-step descent inequality on a deterministic trace, where the
/// conditional expectation is the realized value:
/// f(θ_{t+1}) − f(θ_t) ≤ −c₁ Σ η‖∇f‖² + c₂ Σ η², with c₁ = c_Γ/(2 C_Δ)
/// and c₂ = (C_Δ²/c_Γ²)(G² + σ²).
pub fn check_descent<T: Scalar>(trace: &RunTrace<T>, ctx: &BoundContext<T>) -> BoundCheck {
    let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
    let c1 = f(ctx.c_gamma) / (2.0 * f(ctx.cap_delta));
    let c2 = (f(ctx.cap_delta) / f(ctx.c_gamma)).powi(2)
        * (f(ctx.g_obs).powi(2) + f(ctx.sigma2_obs));
    let n = trace.records.len();
    let margins = (1..n.saturating_sub(1)).map(|k| {
        let rec = &trace.records[k];
        let lhs = f(trace.records[k + 1].loss) - f(rec.loss);
        let mut weighted = 0.0;
        let mut sq = 0.0;
        for (l, &eta) in rec.eta.iter().enumerate() {
            let eta = f(eta);
            let gn = f(rec.grad_norm[l]);
            weighted += eta * gn * gn;
            sq += eta * eta;
        }
        let rhs = -c1 * weighted + c2 * sq;
        (rec.t, rhs - lhs)
    });
    BoundCheck::from_margins("descent_inequality", margins)
}

/// Fits the log-log slope of min-running seed-averaged squared gradient
/// norm against the horizon and compares it with −(1−ρ) plus slack.
pub fn check_rate<T: Scalar>(
    groups: &[(u64, Vec<&RunTrace<T>>)],
    rho: T,
) -> Result<BoundCheck> {
    if groups.len() < 2 {
        return Err(CoreError::InvalidConfig(
            "rate check needs at least two horizons".into(),
        ));
    }
    for (horizon, traces) in groups {
        if traces.len() < MIN_RATE_SEEDS {
            return Err(CoreError::InsufficientSeeds {
                needed: MIN_RATE_SEEDS,
                got: traces.len(),
            });
        }
        if let Some(short) = traces.iter().find(|tr| tr.records.len() < *horizon as usize) {
            return Err(CoreError::InvalidConfig(format!(
                "trace with {} records is shorter than its horizon {horizon}",
                short.records.len()
            )));
        }
    }

    let mut xs = Vec::with_capacity(groups.len());
    let mut ys = Vec::with_capacity(groups.len());
    for (horizon, traces) in groups {
        let horizon_len = *horizon as usize;
        let n_seeds = traces.len() as f64;
        let mut running_min = f64::INFINITY;
        for s in 0..horizon_len {
            let mean_sq: f64 = traces
                .iter()
                .map(|tr| {
                    tr.records[s]
                        .grad_norm
                        .iter()
                        .map(|&g| {
                            let g = g.to_f64().unwrap_or(f64::NAN);
                            g * g
                        })
                        .sum::<f64>()
                })
                .sum::<f64>()
                / n_seeds;
            running_min = running_min.min(mean_sq);
        }
        xs.push((*horizon as f64).ln());
        ys.push(running_min.max(1e-300).ln());
    }

    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;

    let threshold = -(1.0 - rho.to_f64().unwrap_or(f64::NAN)) + RATE_SLOPE_SLACK;
    let slack = threshold - slope;
    Ok(BoundCheck {
        name: "rate".into(),
        holds: slack >= 0.0,
        slack,
        worst_iteration: None,
    })
}

/// The per-run report: bounded iterates and the step envelope always,
/// the 2SED cap when the trace carries 2SED values, and the descent
/// inequality when the trace is deterministic.
pub fn standard_report<T: Scalar>(trace: &RunTrace<T>) -> BoundReport {
    let ctx = BoundContext::from_trace(trace);
    let mut checks = vec![
        check_bounded_iterates(trace, &ctx),
        check_step_envelope(trace, &ctx),
    ];
    if trace.records.iter().any(|r| r.sed.is_some()) {
        checks.push(check_sed_bound(trace, &ctx, &trace.config.sed));
    }
    if trace.deterministic {
        checks.push(check_descent(trace, &ctx));
    }
    BoundReport { checks }
}
