//! Noise samplers: Gaussian via Box-Muller and symmetric α-stable via the
//! Chambers-Mallows-Stuck transform.
//!
//! Both consume exactly two uniforms per draw, so streams stay aligned
//! across noise kinds and runs remain bitwise reproducible.

use crate::error::{CoreError, Result};
use crate::rng::RngStream;
use crate::scalar::Scalar;

/// One draw from N(0, variance).
pub fn sample_gaussian<T: Scalar>(rng: &mut RngStream, variance: T) -> Result<T> {
    if variance <= T::zero() {
        return Err(CoreError::Domain(format!(
            "gaussian variance must be positive, got {variance}"
        )));
    }
    let u1: T = rng.next_open01();
    let u2: T = rng.next_open01();
    let two = T::from_f64_c(2.0);
    let two_pi = T::from_f64_c(std::f64::consts::TAU);
    let z = (-two * u1.ln()).sqrt() * (two_pi * u2).cos();
    Ok(z * variance.sqrt())
}

/// One draw from a symmetric α-stable law S(stability, scale).
///
/// The symmetric Chambers-Mallows-Stuck transform
///   x = sin(αV) / cos(V)^{1/α} · (cos((1−α)V) / W)^{(1−α)/α}
/// with V uniform on (−π/2, π/2) and W standard exponential has no
/// singularity at stability = 1 (it reduces to tan V, Cauchy) and equals
/// N(0, 2·scale²) at stability = 2.
pub fn sample_alpha_stable<T: Scalar>(rng: &mut RngStream, stability: T, scale: T) -> Result<T> {
    let two = T::from_f64_c(2.0);
    if stability <= T::zero() || stability > two {
        return Err(CoreError::Domain(format!(
            "stability index must lie in (0, 2], got {stability}"
        )));
    }
    if scale <= T::zero() {
        return Err(CoreError::Domain(format!(
            "scale must be positive, got {scale}"
        )));
    }
    let u: T = rng.next_open01();
    let e: T = rng.next_open01();
    let pi = T::from_f64_c(std::f64::consts::PI);
    let half = T::from_f64_c(0.5);
    let v = pi * (u - half);
    let w = -e.ln();

    let alpha = stability;
    let numer = (alpha * v).sin();
    let denom = v.cos().powf(alpha.recip());
    let tail = (((T::one() - alpha) * v).cos() / w).powf((T::one() - alpha) / alpha);
    Ok(scale * numer / denom * tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gaussian_series(seed: u64, variance: f64, n: usize) -> Vec<f64> {
        let mut rng = RngStream::new(seed);
        (0..n)
            .map(|_| sample_gaussian(&mut rng, variance).unwrap())
            .collect()
    }

    fn stable_series(seed: u64, stability: f64, scale: f64, n: usize) -> Vec<f64> {
        let mut rng = RngStream::new(seed);
        (0..n)
            .map(|_| sample_alpha_stable(&mut rng, stability, scale).unwrap())
            .collect()
    }

    #[test]
    fn gaussian_first_draw_matches_independent_reconstruction() {
        // Reference path rebuilt from raw ChaCha output, bypassing RngStream
        // and sample_gaussian entirely.
        use rand_chacha::rand_core::{RngCore, SeedableRng};
        let mut raw = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let to_open01 =
            |bits: u64| -> f64 { ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64) };
        let u1 = to_open01(raw.next_u64());
        let u2 = to_open01(raw.next_u64());
        let expected = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos() * 0.5f64.sqrt();

        let mut rng = RngStream::new(7);
        let got: f64 = sample_gaussian(&mut rng, 0.5).unwrap();
        assert_eq!(got.to_bits(), expected.to_bits());
        // golden value frozen from the first recorded run
        assert_eq!(got, 0.6696176383556344);
    }

    #[test]
    fn gaussian_rejects_nonpositive_variance() {
        let mut rng = RngStream::new(0);
        assert!(sample_gaussian(&mut rng, 0.0).is_err());
        assert!(sample_gaussian(&mut rng, -1.0).is_err());
    }

    #[test]
    fn tiny_variance_monte_carlo() {
        let xs = gaussian_series(11, 1e-12, 1_000_000);
        let var = xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64;
        assert!((var - 1e-12).abs() <= 0.05 * 1e-12, "var = {var:e}");
    }

    #[test]
    fn gaussian_mean_within_clt_band() {
        for seed in [0u64, 5, 91] {
            let n = 1_000_000usize;
            let variance = 0.5f64;
            let mean = gaussian_series(seed, variance, n).iter().sum::<f64>() / n as f64;
            let band = 4.0 * (variance / n as f64).sqrt();
            assert!(mean.abs() <= band, "seed {seed}: mean {mean:e} > {band:e}");
        }
    }

    #[test]
    fn stable_at_index_two_has_gaussian_variance() {
        let scale = 0.7f64;
        let xs = stable_series(4, 2.0, scale, 1_000_000);
        let var = xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64;
        let want = 2.0 * scale * scale;
        assert!((var - want).abs() <= 0.05 * want, "var = {var}");
    }

    #[test]
    fn stable_is_symmetric_around_zero() {
        let xs = stable_series(8, 1.8, 1.0, 1_000_000);
        let below = xs.iter().filter(|&&x| x <= 0.0).count() as f64 / xs.len() as f64;
        assert!((below - 0.5).abs() <= 0.01, "F(0) = {below}");
    }

    #[test]
    fn stable_tail_exponent_by_hill_estimator() {
        // Hill estimate over the top 1% order statistics of |x|.
        let mut xs: Vec<f64> = stable_series(15, 1.8, 1.0, 1_000_000)
            .into_iter()
            .map(f64::abs)
            .collect();
        xs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let k = xs.len() / 100;
        let threshold = xs[k];
        let h = xs[..k].iter().map(|x| (x / threshold).ln()).sum::<f64>() / k as f64;
        let alpha_hat = 1.0 / h;
        assert!(
            (1.5..=2.1).contains(&alpha_hat),
            "hill tail exponent {alpha_hat}"
        );
    }

    #[test]
    fn stable_index_two_vs_gaussian_kolmogorov_smirnov() {
        // Two-sample KS at significance 0.01 on 1e5 draws each:
        // S(2, s) should be indistinguishable from N(0, 2 s^2).
        let n = 100_000usize;
        let scale = 0.5f64;
        let mut a = stable_series(21, 2.0, scale, n);
        let mut b = gaussian_series(22, 2.0 * scale * scale, n);
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut d: f64 = 0.0;
        let (mut i, mut j) = (0usize, 0usize);
        while i < n && j < n {
            if a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
            let gap = (i as f64 - j as f64).abs() / n as f64;
            d = d.max(gap);
        }
        // c(0.01) = sqrt(-ln(0.005)/2) = 1.6276, threshold c*sqrt(2/n)
        let crit = 1.6276236115189503 * (2.0 / n as f64).sqrt();
        assert!(d <= crit, "KS statistic {d} exceeds {crit}");
    }

    #[test]
    fn stable_rejects_out_of_range_stability() {
        let mut rng = RngStream::new(0);
        assert!(sample_alpha_stable(&mut rng, 0.0, 1.0).is_err());
        assert!(sample_alpha_stable(&mut rng, 2.2, 1.0).is_err());
        assert!(sample_alpha_stable(&mut rng, 1.8, 0.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn samplers_reproduce_bitwise_from_seed(seed in any::<u64>()) {
            let a = gaussian_series(seed, 0.5, 64);
            let b = gaussian_series(seed, 0.5, 64);
            prop_assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));

            let c = stable_series(seed, 1.8, 0.5, 64);
            let d = stable_series(seed, 1.8, 0.5, 64);
            prop_assert!(c.iter().zip(&d).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }
}
