//! Acceptance suite: one test per release criterion, each printing a
//! pass/fail line and asserting its stated tolerances.
//!
//! Criterion 4's divergence cap is asserted exactly as stated and is
//! expected to fail: the AR(2) regressor under α-stable(1.8) noise has
//! infinite variance, and the un-normalized LMS-style update cascades
//! past any fixed bound on a subset of seeds for every step-size schedule
//! that still meets the median-error clause. The failure message carries
//! the measured evidence.

use std::time::Instant;

use fracdim_core::bounds::{check_rate, standard_report, BoundContext};
use fracdim_core::fisher::FisherState;
use fracdim_core::linalg::{eigen_sym, SymMatrix};
use fracdim_core::optim::{run_optimizer, Method, OptimizerConfig, RunTrace};
use fracdim_core::problems::{ar_loss_grad, ar_problem, quadratic_problem, ArModel, InitMode, NoiseModel};
use fracdim_core::rng::RngStream;
use fracdim_core::special::gamma;

const SEEDS: std::ops::Range<u64> = 0..20;
const T_MAX: u64 = 1400;
const BURN_IN: usize = 100;
const AR_COEFFS: [f64; 2] = [1.5, -0.7];

fn gaussian_noise() -> NoiseModel<f64> {
    NoiseModel::Gaussian { variance: 0.5 }
}

fn stable_noise() -> NoiseModel<f64> {
    NoiseModel::AlphaStable {
        stability: 1.8,
        scale: 0.5,
    }
}

fn ar_trace(
    cfg: &OptimizerConfig<f64>,
    noise: NoiseModel<f64>,
    method: Method,
    seed: u64,
    t_max: u64,
) -> RunTrace<f64> {
    let problem = ar_problem(
        ArModel::new(AR_COEFFS.to_vec(), noise, seed).unwrap(),
        InitMode::Zeros,
        BURN_IN,
        seed,
    )
    .unwrap();
    run_optimizer(problem, method, cfg, t_max, seed).unwrap()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

#[test]
fn criterion_1_reduction_exactness() {
    let start = Instant::now();
    let mut cfg = OptimizerConfig::<f64>::default();
    cfg.alpha0 = 1.0;
    cfg.beta = 0.0;

    // quadratic problem
    let mk_quad = || quadratic_problem::<f64>(2, 10.0, 7).unwrap();
    let sgd = run_optimizer(mk_quad(), Method::Sgd, &cfg, 200, 7).unwrap();
    let fosgd = run_optimizer(mk_quad(), Method::Fosgd, &cfg, 200, 7).unwrap();
    let sed = run_optimizer(mk_quad(), Method::SedFosgd, &cfg, 200, 7).unwrap();
    assert!(sgd.same_trajectory(&fosgd), "FOSGD(α=1) != SGD on quadratic");
    assert!(sgd.same_trajectory(&sed), "2SEDFOSGD(α=1, β=0) != SGD on quadratic");

    // stochastic AR problem, same seed
    let sgd = ar_trace(&cfg, gaussian_noise(), Method::Sgd, 11, 100);
    let fosgd = ar_trace(&cfg, gaussian_noise(), Method::Fosgd, 11, 100);
    let sed = ar_trace(&cfg, gaussian_noise(), Method::SedFosgd, 11, 100);
    assert!(sgd.same_trajectory(&fosgd), "FOSGD(α=1) != SGD on AR(2)");
    assert!(sgd.same_trajectory(&sed), "2SEDFOSGD(α=1, β=0) != SGD on AR(2)");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}, budget 1 s");
    println!("criterion 1 (reduction exactness): PASS ({elapsed:?})");
}

#[test]
fn criterion_2_gaussian_ar2_convergence() {
    let start = Instant::now();
    let cfg = OptimizerConfig::<f64>::default();

    let mut per_method_means = Vec::new();
    for method in [Method::Fosgd, Method::SedFosgd] {
        let mut e1 = Vec::new();
        let mut e2 = Vec::new();
        for seed in SEEDS {
            let trace = ar_trace(&cfg, gaussian_noise(), method, seed, T_MAX);
            let errs = trace.final_abs_errors().unwrap();
            e1.push(errs[0][0]);
            e2.push(errs[0][1]);
        }
        let (m1, m2) = (mean(&e1), mean(&e2));
        assert!(
            m1 <= 0.1 && m2 <= 0.1,
            "{}: mean final abs errors ({m1:.4}, {m2:.4}) exceed 0.1",
            method.name()
        );
        per_method_means.push(0.5 * (m1 + m2));
        println!(
            "criterion 2: {} mean final abs errors = ({m1:.4}, {m2:.4})",
            method.name()
        );
    }
    let (fosgd_mean, sed_mean) = (per_method_means[0], per_method_means[1]);
    assert!(
        sed_mean <= fosgd_mean,
        "2SEDFOSGD mean error {sed_mean:.4} exceeds FOSGD {fosgd_mean:.4}"
    );

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}, budget 30 s");
    println!("criterion 2 (gaussian AR(2) convergence): PASS ({elapsed:?})");
}

#[test]
fn criterion_3_effective_alpha_stability() {
    let cfg = OptimizerConfig::<f64>::default();
    let lo = cfg.alpha0 - cfg.beta;
    for seed in SEEDS {
        let trace = ar_trace(&cfg, gaussian_noise(), Method::SedFosgd, seed, T_MAX);
        let means = trace.mean_alpha_tail(0.10);
        let stds = trace.std_alpha_tail(0.10);
        for (l, (&m, &s)) in means.iter().zip(&stds).enumerate() {
            assert!(
                m >= lo && m <= cfg.alpha0,
                "seed {seed} layer {l}: tail mean α = {m} outside [{lo}, {}]",
                cfg.alpha0
            );
            assert!(
                s < cfg.beta,
                "seed {seed} layer {l}: tail α std {s} not below β = {}",
                cfg.beta
            );
        }
    }
    println!("criterion 3 (effective-α confinement and stability): PASS");
}

#[test]
fn criterion_4_heavy_tailed_robustness() {
    let start = Instant::now();
    let cfg = OptimizerConfig::<f64>::default();

    let mut blown: Vec<(&'static str, u64, f64)> = Vec::new();
    let mut medians = Vec::new();
    for method in [Method::Fosgd, Method::SedFosgd] {
        let mut e1 = Vec::new();
        let mut e2 = Vec::new();
        for seed in SEEDS {
            let trace = ar_trace(&cfg, stable_noise(), method, seed, T_MAX);
            let errs = trace.final_abs_errors().unwrap();
            e1.push(errs[0][0]);
            e2.push(errs[0][1]);
            let m = trace.max_abs_estimate();
            if !(m < 1e3) {
                blown.push((method.name(), seed, m));
            }
        }
        let (m1, m2) = (median(e1), median(e2));
        medians.push((method, m1, m2));
        println!(
            "criterion 4: {} median final abs errors = ({m1:.4}, {m2:.4})",
            method.name()
        );
    }
    for (method, m1, m2) in &medians {
        assert!(
            *m1 <= 0.2 && *m2 <= 0.2,
            "{}: median final abs errors ({m1:.4}, {m2:.4}) exceed 0.2",
            method.name()
        );
    }
    println!("criterion 4: median clause PASS; runtime {:?}", start.elapsed());
    assert!(start.elapsed().as_secs_f64() < 30.0, "budget 30 s exceeded");

    // Divergence cap, asserted exactly as specified. This clause is
    // expected red: the heavy-tailed regressor makes the un-normalized
    // update cascade on a subset of seeds at every step size compatible
    // with the median clause (see the failure message for the evidence).
    println!(
        "criterion 4: divergence cap (max |θ̂| < 1e3): {}",
        if blown.is_empty() { "PASS" } else { "FAIL" }
    );
    assert!(
        blown.is_empty(),
        "criterion 4 divergence cap failed: {} (method, seed) runs exceed \
         1e3 under α-stable(1.8, 0.5) noise: {:?}. A noise spike x with \
         μ_t·x² ≳ 2 enters the regressor and the error recursion amplifies \
         by ≈ μ_t‖φ‖² per step while the spike persists in the AR(2) \
         impulse response; spike probabilities make this a Θ(1)-per-run \
         event for every μ₀ large enough to satisfy the median clause. \
         Lowering μ₀ until no seed diverges (μ₀ ≲ 2e-3) drives the median \
         above 1.4.",
        blown.len(),
        blown
    );
}

#[test]
fn criterion_5_theoretical_bounds() {
    let start = Instant::now();
    let cfg = OptimizerConfig::<f64>::default();

    // Gaussian default experiment: every seed, both fractional methods.
    for method in [Method::Fosgd, Method::SedFosgd] {
        for seed in SEEDS {
            let trace = ar_trace(&cfg, gaussian_noise(), method, seed, T_MAX);
            let report = standard_report(&trace);
            for check in &report.checks {
                assert!(
                    check.holds,
                    "gaussian {} seed {seed}: {} failed (slack {}, worst {:?})",
                    method.name(),
                    check.name,
                    check.slack,
                    check.worst_iteration
                );
            }
        }
    }

    // α-stable default experiment: checks run on every trace whose
    // observables are finite; divergent seeds violate the bounded-gradient
    // premise the constants are instantiated from (criterion 4's failure).
    let mut finite = 0;
    let mut skipped = 0;
    for seed in SEEDS {
        let trace = ar_trace(&cfg, stable_noise(), Method::SedFosgd, seed, T_MAX);
        let ctx = BoundContext::from_trace(&trace);
        if !(ctx.g_obs.is_finite() && ctx.r_delta_obs.is_finite() && ctx.sigma2_obs.is_finite()) {
            skipped += 1;
            continue;
        }
        finite += 1;
        let report = standard_report(&trace);
        for check in &report.checks {
            assert!(
                check.holds,
                "α-stable seed {seed}: {} failed (slack {})",
                check.name, check.slack
            );
        }
    }
    assert!(finite > 0, "no finite α-stable traces to check");
    println!(
        "criterion 5: α-stable bound checks on {finite} finite traces \
         ({skipped} divergent seeds excluded; see criterion 4)"
    );

    // Deterministic quadratic: all four checks including descent.
    let mut qcfg = OptimizerConfig::<f64>::default();
    qcfg.mu0 = 0.01;
    let problem = quadratic_problem::<f64>(2, 10.0, 3).unwrap();
    let trace = run_optimizer(problem, Method::SedFosgd, &qcfg, 500, 3).unwrap();
    let report = standard_report(&trace);
    assert_eq!(report.checks.len(), 4);
    for check in &report.checks {
        assert!(
            check.holds,
            "quadratic: {} failed (slack {})",
            check.name, check.slack
        );
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}, budget 60 s");
    println!("criterion 5 (theoretical bounds hold): PASS ({elapsed:?})");
}

#[test]
fn criterion_6_rate_property() {
    let start = Instant::now();
    let mut cfg = OptimizerConfig::<f64>::default();
    cfg.mu0 = 0.05;
    cfg.rho = 0.7;

    let horizons = [200u64, 400, 800, 1600, 3200];
    let mut owned: Vec<(u64, Vec<RunTrace<f64>>)> = Vec::new();
    for &h in &horizons {
        let traces: Vec<RunTrace<f64>> = SEEDS
            .map(|seed| {
                let problem = quadratic_problem::<f64>(2, 10.0, seed).unwrap();
                run_optimizer(problem, Method::SedFosgd, &cfg, h, seed).unwrap()
            })
            .collect();
        owned.push((h, traces));
    }
    let groups: Vec<(u64, Vec<&RunTrace<f64>>)> = owned
        .iter()
        .map(|(h, ts)| (*h, ts.iter().collect()))
        .collect();
    let check = check_rate(&groups, 0.7).unwrap();
    let slope = -(1.0 - 0.7) + 0.15 - check.slack;
    println!("criterion 6: fitted log-log slope = {slope:.4} (threshold -0.15)");
    assert!(check.holds, "slope {slope:.4} above -0.15");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}, budget 2 min");
    println!("criterion 6 (O(1/T^(1-ρ)) rate at desk scale): PASS ({elapsed:?})");
}

#[test]
fn criterion_7_numerical_oracles() {
    // gamma reference values at 1e-12
    let refs = [
        (1.0, 1.0),
        (1.25, 0.906_402_477_055_477_3),
        (1.5, 0.886_226_925_452_758_0),
        (1.75, 0.919_062_526_848_883_3),
        (2.0, 1.0),
    ];
    for (x, want) in refs {
        let got: f64 = gamma(x).unwrap();
        assert!((got - want).abs() <= 1e-12, "gamma({x}) = {got:.17e}");
    }

    // logdet_shifted_sqrt vs explicit dense log-determinant on 100 random
    // PSD matrices of dim <= 6. The matrix is built as QΛQᵀ from a known
    // nonnegative spectrum and a random orthogonal Q, so I + s·M^{1/2} can
    // be formed explicitly and its determinant taken by LU elimination —
    // independent of the eigensolver path under test.
    let mut rng = RngStream::new(2024);
    for case in 0..100 {
        let dim = 1 + (case % 6);
        let q = random_orthogonal(&mut rng, dim);
        let lam: Vec<f64> = (0..dim)
            .map(|_| 4.0 * rng.next_open01::<f64>())
            .collect();
        let scale = 0.5 + 10.0 * rng.next_open01::<f64>();

        let mut m = SymMatrix::zeros(dim);
        let mut a = vec![vec![0.0f64; dim]; dim]; // I + scale * Q sqrt(Λ) Qᵀ
        for i in 0..dim {
            for j in 0..=i {
                let mij: f64 = (0..dim).map(|k| q[i][k] * lam[k] * q[j][k]).sum();
                m.set(i, j, mij);
            }
            for j in 0..dim {
                let sij: f64 = (0..dim).map(|k| q[i][k] * lam[k].sqrt() * q[j][k]).sum();
                a[i][j] = scale * sij + if i == j { 1.0 } else { 0.0 };
            }
        }
        let want = lu_log_determinant(a);
        let spec = eigen_sym(&m).unwrap();
        let got = spec
            .clamped(fracdim_core::linalg::psd_clamp_tol(&m))
            .logdet_shifted_sqrt(scale);
        assert!(
            (got - want).abs() <= 1e-8,
            "case {case} (dim {dim}): logdet {got:.12e} vs dense {want:.12e}"
        );
    }

    // EMA closed form 1 - (1-γ)^t to 1e-10 out to t = 1e4
    let gamma_ema = 0.1f64;
    let g = [1.3, -0.4, 0.9];
    let mut state = FisherState::new(3, gamma_ema).unwrap();
    let checkpoints = [1u32, 10, 100, 1000, 10_000];
    let mut t = 0u32;
    for &cp in &checkpoints {
        while t < cp {
            state.update(&g).unwrap();
            t += 1;
        }
        let w = 1.0 - (1.0 - gamma_ema).powi(cp as i32);
        for i in 0..3 {
            for j in 0..3 {
                let want = w * g[i] * g[j];
                let got = state.matrix().get(i, j);
                assert!(
                    (got - want).abs() <= 1e-10,
                    "t={cp}: EMA entry ({i},{j}) {got:.15e} vs {want:.15e}"
                );
            }
        }
    }

    // analytic AR gradients vs central finite differences, 1e-5 relative
    let mut rng = RngStream::new(77);
    for _ in 0..100 {
        let theta: Vec<f64> = (0..2).map(|_| 4.0 * rng.next_open01::<f64>() - 2.0).collect();
        let phi: Vec<f64> = (0..2).map(|_| 8.0 * rng.next_open01::<f64>() - 4.0).collect();
        let y = 10.0 * rng.next_open01::<f64>() - 5.0;
        let (_, grad) = ar_loss_grad(&theta, y, &phi).unwrap();
        for i in 0..2 {
            let h = 1e-6 * 1.0f64.max(theta[i].abs());
            let mut tp = theta.clone();
            tp[i] += h;
            let mut tm = theta.clone();
            tm[i] -= h;
            let (lp, _) = ar_loss_grad(&tp, y, &phi).unwrap();
            let (lm, _) = ar_loss_grad(&tm, y, &phi).unwrap();
            let fd = (lp - lm) / (2.0 * h);
            assert!(
                (fd - grad[i]).abs() <= 1e-5 * 1.0f64.max(grad[i].abs()),
                "finite difference mismatch: {fd} vs {}",
                grad[i]
            );
        }
    }

    println!("criterion 7 (numerical oracles): PASS");
}

fn random_orthogonal(rng: &mut RngStream, dim: usize) -> Vec<Vec<f64>> {
    // Gram-Schmidt on a random Gaussian-ish matrix.
    let mut cols: Vec<Vec<f64>> = (0..dim)
        .map(|_| {
            (0..dim)
                .map(|_| 2.0 * rng.next_open01::<f64>() - 1.0)
                .collect()
        })
        .collect();
    for k in 0..dim {
        for j in 0..k {
            let dot: f64 = (0..dim).map(|i| cols[k][i] * cols[j][i]).sum();
            for i in 0..dim {
                cols[k][i] -= dot * cols[j][i];
            }
        }
        let norm: f64 = cols[k].iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm > 1e-8, "degenerate Gram-Schmidt draw");
        for i in 0..dim {
            cols[k][i] /= norm;
        }
    }
    // return as row-indexed matrix q[i][k] = component i of column k
    (0..dim).map(|i| (0..dim).map(|k| cols[k][i]).collect()).collect()
}

fn lu_log_determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut log_det = 0.0f64;
    let mut sign = 1.0f64;
    for k in 0..n {
        let (mut pivot_row, mut pivot_val) = (k, a[k][k].abs());
        for r in (k + 1)..n {
            if a[r][k].abs() > pivot_val {
                pivot_row = r;
                pivot_val = a[r][k].abs();
            }
        }
        assert!(pivot_val > 0.0, "singular matrix in oracle");
        if pivot_row != k {
            a.swap(pivot_row, k);
            sign = -sign;
        }
        let akk = a[k][k];
        log_det += akk.abs().ln();
        if akk < 0.0 {
            sign = -sign;
        }
        for r in (k + 1)..n {
            let f = a[r][k] / akk;
            for c in k..n {
                a[r][c] -= f * a[k][c];
            }
        }
    }
    assert!(sign > 0.0, "oracle determinant should be positive");
    log_det
}
