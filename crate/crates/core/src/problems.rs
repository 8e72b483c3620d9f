//! Optimization problems: streaming AR(p) system identification and a
//! deterministic quadratic used as an oracle for the optimizer and bound
//! checks.

use crate::error::{CoreError, Result};
use crate::noise::{sample_alpha_stable, sample_gaussian};
use crate::rng::{stream, RngStream};
use crate::scalar::Scalar;

/// Distribution of the AR innovation ξ(k).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel<T> {
    Gaussian { variance: T },
    AlphaStable { stability: T, scale: T },
}

impl<T: Scalar> NoiseModel<T> {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::Gaussian { variance } => {
                if variance <= T::zero() {
                    return Err(CoreError::InvalidConfig(format!(
                        "gaussian variance must be positive, got {variance}"
                    )));
                }
            }
            NoiseModel::AlphaStable { stability, scale } => {
                if stability <= T::zero() || stability > T::from_f64_c(2.0) {
                    return Err(CoreError::InvalidConfig(format!(
                        "stability must lie in (0, 2], got {stability}"
                    )));
                }
                if scale <= T::zero() {
                    return Err(CoreError::InvalidConfig(format!(
                        "noise scale must be positive, got {scale}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn sample(&self, rng: &mut RngStream) -> Result<T> {
        match *self {
            NoiseModel::Gaussian { variance } => sample_gaussian(rng, variance),
            NoiseModel::AlphaStable { stability, scale } => {
                sample_alpha_stable(rng, stability, scale)
            }
        }
    }
}

/// Streaming AR(p) generator: y(k) = Σ aᵢ y(k−i) + ξ(k).
#[derive(Debug, Clone)]
pub struct ArModel<T> {
    coeffs: Vec<T>,
    noise: NoiseModel<T>,
    /// Most-recent-first outputs, so `history` is exactly the regressor
    /// φ(k) = [y(k−1), …, y(k−p)].
    history: Vec<T>,
    rng: RngStream,
}

impl<T: Scalar> ArModel<T> {
    /// History starts at zeros; the noise stream is derived from `seed`.
    /// Stationarity of the coefficient polynomial is checkable but not
    /// enforced (callers may warn).
    pub fn new(coeffs: Vec<T>, noise: NoiseModel<T>, seed: u64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(CoreError::InvalidConfig(
                "AR model needs at least one coefficient".into(),
            ));
        }
        noise.validate()?;
        let order = coeffs.len();
        Ok(Self {
            coeffs,
            noise,
            history: vec![T::zero(); order],
            rng: RngStream::with_stream(seed, stream::NOISE),
        })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Spectral radius of the companion matrix, estimated by iterated
    /// multiplication with norm tracking (handles complex root pairs).
    pub fn companion_spectral_radius(&self) -> T {
        let p = self.coeffs.len();
        if p == 1 {
            return self.coeffs[0].abs();
        }
        let mut v = vec![T::one(); p];
        let mut log_growth = T::zero();
        let iters = 400usize;
        for _ in 0..iters {
            let mut next = vec![T::zero(); p];
            next[0] = self.coeffs.iter().zip(&v).map(|(&a, &x)| a * x).sum();
            for i in 1..p {
                next[i] = v[i - 1];
            }
            let norm = next.iter().map(|&x| x * x).sum::<T>().sqrt();
            if norm == T::zero() {
                return T::zero();
            }
            for x in &mut next {
                *x /= norm;
            }
            log_growth += norm.ln();
            v = next;
        }
        (log_growth / T::from_f64_c(iters as f64)).exp()
    }

    /// True when all characteristic roots lie strictly inside the unit
    /// disk.
    pub fn is_stationary(&self) -> bool {
        self.companion_spectral_radius() < T::one()
    }

    /// Draws ξ(k), emits (y(k), φ(k)) and rotates the history.
    pub fn generate(&mut self) -> Result<(T, Vec<T>)> {
        let phi = self.history.clone();
        let xi = self.noise.sample(&mut self.rng)?;
        let y = self
            .coeffs
            .iter()
            .zip(&phi)
            .map(|(&a, &x)| a * x)
            .sum::<T>()
            + xi;
        self.history.rotate_right(1);
        self.history[0] = y;
        Ok((y, phi))
    }

    /// Advances the process without emitting samples, so the regressors
    /// seen by the optimizer come from near-stationary dynamics.
    pub fn burn_in(&mut self, steps: usize) -> Result<()> {
        for _ in 0..steps {
            self.generate()?;
        }
        Ok(())
    }
}

/// Squared prediction loss ½(y − φᵀθ̂)² and its gradient −(y − φᵀθ̂)·φ.
pub fn ar_loss_grad<T: Scalar>(theta: &[T], y: T, phi: &[T]) -> Result<(T, Vec<T>)> {
    if theta.len() != phi.len() {
        return Err(CoreError::DimensionMismatch {
            expected: phi.len(),
            got: theta.len(),
        });
    }
    let pred = theta.iter().zip(phi).map(|(&t, &p)| t * p).sum::<T>();
    let resid = y - pred;
    let half = T::from_f64_c(0.5);
    let loss = half * resid * resid;
    let grad = phi.iter().map(|&p| -resid * p).collect();
    Ok((loss, grad))
}

/// How θ̂ is initialized for the AR task.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    Zeros,
    /// Seeded uniform(−0.5, 0.5) per coordinate.
    Uniform,
}

impl std::str::FromStr for InitMode {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zeros" => Ok(InitMode::Zeros),
            "uniform" => Ok(InitMode::Uniform),
            other => Err(CoreError::InvalidConfig(format!(
                "unknown init mode '{other}' (expected zeros | uniform)"
            ))),
        }
    }
}

type Oracle<T> = Box<dyn FnMut(&[Vec<T>], u64) -> Result<(T, Vec<Vec<T>>)> + Send>;

/// A problem the optimizer can run against: initial layered parameters, an
/// optional reference solution, and a (loss, gradient) oracle indexed by
/// step.
pub struct ProblemHandle<T> {
    layer_dims: Vec<usize>,
    initial: Vec<Vec<T>>,
    target: Option<Vec<Vec<T>>>,
    deterministic: bool,
    oracle: Oracle<T>,
}

impl<T: Scalar> ProblemHandle<T> {
    pub fn new(
        initial: Vec<Vec<T>>,
        target: Option<Vec<Vec<T>>>,
        deterministic: bool,
        oracle: Oracle<T>,
    ) -> Self {
        let layer_dims = initial.iter().map(Vec::len).collect();
        Self {
            layer_dims,
            initial,
            target,
            deterministic,
            oracle,
        }
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn initial(&self) -> &[Vec<T>] {
        &self.initial
    }

    pub fn target(&self) -> Option<&[Vec<T>]> {
        self.target.as_deref()
    }

    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    pub fn evaluate(&mut self, params: &[Vec<T>], step: u64) -> Result<(T, Vec<Vec<T>>)> {
        (self.oracle)(params, step)
    }
}

impl<T> std::fmt::Debug for ProblemHandle<T>
where
    T: std::fmt::Debug,
{
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemHandle")
            .field("layer_dims", &self.layer_dims)
            .field("deterministic", &self.deterministic)
            .finish_non_exhaustive()
    }
}

/// Online AR identification as a single-layer problem of dimension p. The
/// model is burned in so φ comes from near-stationary dynamics; θ̂ starts
/// at zeros or at a seeded uniform draw.
pub fn ar_problem<T: Scalar>(
    mut model: ArModel<T>,
    init: InitMode,
    burn_in: usize,
    seed: u64,
) -> Result<ProblemHandle<T>> {
    model.burn_in(burn_in)?;
    let p = model.order();
    let initial = match init {
        InitMode::Zeros => vec![vec![T::zero(); p]],
        InitMode::Uniform => {
            let mut rng = RngStream::with_stream(seed, stream::INIT);
            let half = T::from_f64_c(0.5);
            vec![(0..p).map(|_| rng.next_open01::<T>() - half).collect()]
        }
    };
    let target = Some(vec![model.coeffs().to_vec()]);
    let oracle: Oracle<T> = Box::new(move |params, _step| {
        let (y, phi) = model.generate()?;
        let (loss, grad) = ar_loss_grad(&params[0], y, &phi)?;
        Ok((loss, vec![grad]))
    });
    Ok(ProblemHandle::new(initial, target, false, oracle))
}

/// Deterministic diagonal quadratic f(θ) = ½ θᵀAθ with eigenvalues
/// log-spaced in [1, condition], exact gradient Aθ and minimizer at 0.
/// θ₀ is a seeded random direction of unit norm.
pub fn quadratic_problem<T: Scalar>(
    dim: usize,
    condition: f64,
    seed: u64,
) -> Result<ProblemHandle<T>> {
    if dim < 1 {
        return Err(CoreError::InvalidConfig("dim must be at least 1".into()));
    }
    if condition < 1.0 {
        return Err(CoreError::InvalidConfig(format!(
            "condition must be at least 1, got {condition}"
        )));
    }
    let eigenvalues: Vec<T> = if dim == 1 {
        vec![T::one()]
    } else {
        (0..dim)
            .map(|i| T::from_f64_c(condition.powf(i as f64 / (dim - 1) as f64)))
            .collect()
    };

    let mut rng = RngStream::with_stream(seed, stream::INIT);
    let mut theta0: Vec<T> = (0..dim)
        .map(|_| sample_gaussian(&mut rng, T::one()))
        .collect::<Result<_>>()?;
    let norm = theta0.iter().map(|&x| x * x).sum::<T>().sqrt();
    for x in &mut theta0 {
        *x /= norm;
    }

    let target = Some(vec![vec![T::zero(); dim]]);
    let evs = eigenvalues.clone();
    let half = T::from_f64_c(0.5);
    let oracle: Oracle<T> = Box::new(move |params, _step| {
        let theta = &params[0];
        let loss = half
            * theta
                .iter()
                .zip(&evs)
                .map(|(&x, &l)| l * x * x)
                .sum::<T>();
        let grad = theta.iter().zip(&evs).map(|(&x, &l)| l * x).collect();
        Ok((loss, vec![grad]))
    });
    Ok(ProblemHandle::new(vec![theta0], target, true, oracle))
}
