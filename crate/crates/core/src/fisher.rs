//! Per-layer empirical Fisher tracking and the Two-Scale Effective
//! Dimension (2SED).
//!
//! The Fisher estimate is an exponential moving average of gradient outer
//! products; 2SED blends the nominal parameter count with a curvature term
//! derived from log det(I + ε^{−ξ} F̂^{1/2}).

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::linalg::{eigen_sym, psd_clamp_tol, SymMatrix};
use crate::scalar::Scalar;

/// Trace threshold below which normalization returns the zero matrix.
const TOL_TRACE: f64 = 1e-14;

/// EMA empirical Fisher for one layer.
#[derive(Debug, Clone)]
pub struct FisherState<T> {
    matrix: SymMatrix<T>,
    decay: T,
    steps: u64,
    trace_ema: T,
}

impl<T: Scalar> FisherState<T> {
    /// Fresh all-zeros state. `decay` is the EMA weight γ ∈ (0, 1).
    pub fn new(dim: usize, decay: T) -> Result<Self> {
        if decay <= T::zero() || decay >= T::one() {
            return Err(CoreError::InvalidConfig(format!(
                "fisher decay must lie in (0, 1), got {decay}"
            )));
        }
        Ok(Self {
            matrix: SymMatrix::zeros(dim),
            decay,
            steps: 0,
            trace_ema: T::zero(),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn matrix(&self) -> &SymMatrix<T> {
        &self.matrix
    }

    pub fn trace_ema(&self) -> T {
        self.trace_ema
    }

    /// matrix ← (1−γ)·matrix + γ·(g ⊗ g). Keeps the running trace
    /// expectation in lockstep with the same recurrence.
    pub fn update(&mut self, gradient: &[T]) -> Result<()> {
        if gradient.len() != self.matrix.dim() {
            return Err(CoreError::DimensionMismatch {
                expected: self.matrix.dim(),
                got: gradient.len(),
            });
        }
        let keep = T::one() - self.decay;
        let outer = SymMatrix::from_outer(gradient);
        self.matrix.combine_in_place(keep, self.decay, &outer)?;
        let sq_norm = gradient.iter().map(|&g| g * g).sum::<T>();
        self.trace_ema = keep * self.trace_ema + self.decay * sq_norm;
        self.steps += 1;
        Ok(())
    }

    /// (d / trace_estimate) · matrix, or the zero matrix when the trace
    /// estimate is (numerically) zero.
    pub fn normalized(&self, nominal_dim: usize) -> SymMatrix<T> {
        if self.trace_ema <= T::from_f64_c(TOL_TRACE) {
            return SymMatrix::zeros(self.matrix.dim());
        }
        let mut out = self.matrix.clone();
        out.scale_in_place(T::from_f64_c(nominal_dim as f64) / self.trace_ema);
        out
    }
}

/// Knobs of the 2SED measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SedConfig<T> {
    /// Blend weight ζ ∈ [0, 1) between the nominal dimension and the
    /// curvature term.
    pub zeta: T,
    /// Resolution ε ∈ (0, 1).
    pub epsilon: T,
    /// Resolution exponent ξ > 0.
    pub xi: T,
    /// Number of most-recent Fisher snapshots to average the determinant
    /// over; 1 uses the current EMA alone.
    pub mc_samples: usize,
}

impl<T: Scalar> Default for SedConfig<T> {
    fn default() -> Self {
        Self {
            zeta: T::from_f64_c(0.5),
            epsilon: T::from_f64_c(0.01),
            xi: T::one(),
            mc_samples: 1,
        }
    }
}

impl<T: Scalar> SedConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.zeta < T::zero() || self.zeta >= T::one() {
            return Err(CoreError::InvalidConfig(format!(
                "zeta must lie in [0, 1), got {}",
                self.zeta
            )));
        }
        if self.epsilon <= T::zero() || self.epsilon >= T::one() {
            return Err(CoreError::InvalidConfig(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if self.xi <= T::zero() {
            return Err(CoreError::InvalidConfig(format!(
                "xi must be positive, got {}",
                self.xi
            )));
        }
        if self.mc_samples == 0 {
            return Err(CoreError::InvalidConfig(
                "mc_samples must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// ε^{−ξ}, the eigenvalue scale inside the determinant.
    pub fn eigen_scale(&self) -> T {
        self.epsilon.powf(-self.xi)
    }

    /// |log(ε^ξ)| = ξ·|log ε|, the denominator of the curvature term.
    pub fn log_denominator(&self) -> T {
        (self.xi * self.epsilon.ln()).abs()
    }
}

/// One evaluated 2SED: the blended value plus its pieces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SedValue<T> {
    pub value: T,
    pub nominal_dim: usize,
    pub d_curv: T,
}

/// 2SED of a single (normalized or raw) Fisher matrix:
/// ζ·d + (1−ζ)·Σ log(1 + ε^{−ξ}√λᵢ) / |log ε^ξ|.
pub fn compute_2sed<T: Scalar>(
    matrix: &SymMatrix<T>,
    cfg: &SedConfig<T>,
    nominal_dim: usize,
) -> Result<SedValue<T>> {
    compute_2sed_windowed(std::slice::from_ref(matrix), cfg, nominal_dim)
}

/// 2SED with the determinant term averaged over a window of recent Fisher
/// snapshots (the Monte Carlo approximation of the expectation). With one
/// snapshot this reduces to `compute_2sed`.
pub fn compute_2sed_windowed<T: Scalar>(
    snapshots: &[SymMatrix<T>],
    cfg: &SedConfig<T>,
    nominal_dim: usize,
) -> Result<SedValue<T>> {
    cfg.validate()?;
    assert!(!snapshots.is_empty(), "need at least one Fisher snapshot");

    let scale = cfg.eigen_scale();
    // log of the mean determinant via log-sum-exp, so large dimensions do
    // not overflow the raw determinant product.
    let log_dets: Vec<T> = snapshots
        .iter()
        .map(|m| {
            let spec = eigen_sym(m)?.clamped(psd_clamp_tol(m));
            Ok(spec.logdet_shifted_sqrt(scale))
        })
        .collect::<Result<_>>()?;
    let max_ld = log_dets
        .iter()
        .copied()
        .fold(T::neg_infinity(), |a, b| a.max(b));
    let n = T::from_f64_c(log_dets.len() as f64);
    let log_mean_det = if log_dets.len() == 1 {
        log_dets[0]
    } else {
        max_ld + (log_dets.iter().map(|&l| (l - max_ld).exp()).sum::<T>() / n).ln()
    };

    let d_curv = log_mean_det / cfg.log_denominator();
    let d = T::from_f64_c(nominal_dim as f64);
    let value = cfg.zeta * d + (T::one() - cfg.zeta) * d_curv;
    Ok(SedValue {
        value,
        nominal_dim,
        d_curv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn unit_cfg() -> SedConfig<f64> {
        SedConfig::default()
    }

    #[test]
    fn first_update_is_scaled_outer_product() {
        let mut state = FisherState::new(2, 0.1).unwrap();
        state.update(&[2.0, -1.0]).unwrap();
        assert_abs_diff_eq!(state.matrix().get(0, 0), 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(state.matrix().get(0, 1), -0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(state.matrix().get(1, 1), 0.1, epsilon = 1e-15);
        assert_eq!(state.steps(), 1);
    }

    #[test]
    fn zero_gradient_decays_trace() {
        let mut state = FisherState::new(2, 0.25).unwrap();
        state.update(&[1.0, 1.0]).unwrap();
        let before = state.matrix().trace();
        state.update(&[0.0, 0.0]).unwrap();
        let after = state.matrix().trace();
        assert_abs_diff_eq!(after, before * 0.75, epsilon = 1e-15);
        assert!(after < before);
    }

    #[test]
    fn constant_unit_gradient_matches_geometric_sum() {
        // after t steps with e1: entry (0, 0) = 1 - (1-γ)^t
        let gamma = 0.1f64;
        let mut state = FisherState::new(3, gamma).unwrap();
        for t in 1..=200u32 {
            state.update(&[1.0, 0.0, 0.0]).unwrap();
            let want = 1.0 - 0.9f64.powi(t as i32);
            assert_abs_diff_eq!(state.matrix().get(0, 0), want, epsilon = 1e-12);
        }
    }

    #[test]
    fn ema_closed_form_holds_to_1e10_out_to_ten_thousand_steps() {
        let gamma = 0.1f64;
        let g = [0.7, -1.3];
        let mut state = FisherState::new(2, gamma).unwrap();
        for _ in 0..10_000 {
            state.update(&g).unwrap();
        }
        let w = 1.0 - (1.0 - gamma).powi(10_000); // = 1 to machine precision
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(
                    state.matrix().get(i, j),
                    w * g[i] * g[j],
                    epsilon = 1e-10
                );
            }
        }
    }

    #[test]
    fn update_rejects_mismatched_gradient() {
        let mut state = FisherState::new(2, 0.1).unwrap();
        assert!(state.update(&[1.0]).is_err());
    }

    #[test]
    fn normalization_of_zero_state_is_zero() {
        let state = FisherState::new(3, 0.1).unwrap();
        let m = state.normalized(3);
        assert_eq!(m.trace(), 0.0);
    }

    #[test]
    fn normalization_fixes_trace_to_nominal_dim() {
        let mut state = FisherState::new(2, 0.5).unwrap();
        state.update(&[2.0, 0.0]).unwrap();
        // matrix = diag(2, 0), trace_ema = 2 = d: normalization is identity
        let m = state.normalized(2);
        assert_abs_diff_eq!(m.get(0, 0), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.get(1, 1), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.trace(), 2.0, epsilon = 1e-15);

        state.update(&[1.0, 1.0]).unwrap();
        let m = state.normalized(2);
        assert_abs_diff_eq!(m.trace(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn sed_of_zero_matrix_is_zeta_d() {
        let cfg = unit_cfg();
        let sed = compute_2sed(&SymMatrix::zeros(4), &cfg, 4).unwrap();
        assert_eq!(sed.d_curv, 0.0);
        assert_eq!(sed.value, cfg.zeta * 4.0);
    }

    #[test]
    fn zeta_one_limit_recovers_nominal_dim() {
        // zeta must stay < 1; approaching it collapses the value to d.
        let cfg = SedConfig {
            zeta: 1.0 - 1e-12,
            ..unit_cfg()
        };
        let m = SymMatrix::from_diagonal(&[3.0, 0.4]);
        let sed = compute_2sed(&m, &cfg, 2).unwrap();
        assert_abs_diff_eq!(sed.value, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn hand_evaluated_single_eigenvalue_case() {
        // diag(1), eps = 0.1, xi = 1, zeta = 0: log(11)/log(10)
        let cfg = SedConfig {
            zeta: 0.0,
            epsilon: 0.1,
            xi: 1.0,
            mc_samples: 1,
        };
        let sed = compute_2sed(&SymMatrix::from_diagonal(&[1.0]), &cfg, 1).unwrap();
        assert_abs_diff_eq!(sed.value, 1.0413926851582249, epsilon = 1e-12);
    }

    #[test]
    fn windowed_average_matches_manual_log_mean_det() {
        let cfg = unit_cfg();
        let a = SymMatrix::from_diagonal(&[1.0, 0.5]);
        let b = SymMatrix::from_diagonal(&[0.2, 0.1]);
        let sed = compute_2sed_windowed(&[a.clone(), b.clone()], &cfg, 2).unwrap();

        let det = |m: &SymMatrix<f64>| -> f64 {
            let s = cfg.eigen_scale();
            (1.0 + s * m.get(0, 0).sqrt()) * (1.0 + s * m.get(1, 1).sqrt())
        };
        let want_curv = (0.5 * (det(&a) + det(&b))).ln() / cfg.log_denominator();
        assert_abs_diff_eq!(sed.d_curv, want_curv, epsilon = 1e-10);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = unit_cfg();
        cfg.zeta = 1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = unit_cfg();
        cfg.epsilon = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = unit_cfg();
        cfg.xi = -1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = unit_cfg();
        cfg.mc_samples = 0;
        assert!(cfg.validate().is_err());
    }

    fn seeded_gradient(seed: u64, dim: usize) -> Vec<f64> {
        let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(7);
        (0..dim)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0
            })
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn psd_preserved_under_update_sequences(
            seed in 0u64..100_000,
            dim in 1usize..5,
            steps in 1usize..30,
        ) {
            let gamma = 0.2f64;
            let mut state = FisherState::new(dim, gamma).unwrap();
            let mut max_sq_norm = 0.0f64;
            for k in 0..steps {
                let g = seeded_gradient(seed.wrapping_add(k as u64), dim);
                max_sq_norm = max_sq_norm.max(g.iter().map(|x| x * x).sum());
                state.update(&g).unwrap();
            }
            let m = state.matrix();
            let spec = eigen_sym(m).unwrap();
            prop_assert!(spec.min() >= -psd_clamp_tol(m));
            // trace tracks the EMA bookkeeping
            prop_assert!((m.trace() - state.trace_ema()).abs() <= 1e-10 * 1.0f64.max(m.trace()));
            // geometric-weight cap: trace <= (1 - (1-γ)^t)·max ‖g‖²
            let cap = (1.0 - (1.0 - gamma).powi(steps as i32)) * max_sq_norm;
            prop_assert!(m.trace() <= cap + 1e-12 * 1.0f64.max(cap));
        }

        #[test]
        fn sed_is_monotone_in_the_loewner_order(
            seed in 0u64..100_000,
            dim in 1usize..5,
        ) {
            // B = A + D with D PSD, so A ⪯ B implies 2SED(A) <= 2SED(B).
            let ga = seeded_gradient(seed, dim);
            let gd = seeded_gradient(seed.wrapping_add(1), dim);
            let a = SymMatrix::from_outer(&ga);
            let mut b = a.clone();
            b.combine_in_place(1.0, 1.0, &SymMatrix::from_outer(&gd)).unwrap();
            let cfg = unit_cfg();
            let sa = compute_2sed(&a, &cfg, dim).unwrap();
            let sb = compute_2sed(&b, &cfg, dim).unwrap();
            prop_assert!(sa.value <= sb.value + 1e-10);
        }
    }
}
