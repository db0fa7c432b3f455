use fracspec::operator::{assemble_operator, richardson, survival_oracle, Grid};
use fracspec::potentials::Potential;
use fracspec::stable_mc::{estimate_gt, sample_subordinator_increment, stream_rng, PathConfig};

/// One-sample Kolmogorov-Smirnov statistic `sqrt(n) D_n` against `cdf`.
fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    d * n.sqrt()
}

// 1% critical value of the limiting Kolmogorov distribution
const KS_CRITICAL: f64 = 1.628;

#[test]
fn half_stable_subordinator_is_levy_distributed() {
    // beta = 1/2: P(eta_t <= x) = erfc(t / (2 sqrt x))
    let t = 0.7;
    let mut rng = stream_rng(11, 0);
    let xs: Vec<f64> = (0..20_000).map(|_| sample_subordinator_increment(0.5, t, &mut rng)).collect();
    let k = ks_statistic(xs, |x| libm::erfc(t / (2.0 * x.sqrt())));
    assert!(k < KS_CRITICAL, "KS statistic {k}");
}

#[test]
fn subordinated_brownian_motion_is_cauchy_at_alpha_one() {
    use rand::Rng;
    let t = 1.3;
    let mut rng = stream_rng(12, 0);
    let xs: Vec<f64> = (0..20_000)
        .map(|_| {
            let eta: f64 = sample_subordinator_increment(0.5, t, &mut rng);
            let z: f64 = rng.sample(rand_distr::StandardNormal);
            (2.0 * eta).sqrt() * z
        })
        .collect();
    let k = ks_statistic(xs, |x| 0.5 + (x / t).atan() / std::f64::consts::PI);
    assert!(k < KS_CRITICAL, "KS statistic {k}");
}

#[test]
fn killed_survival_matches_spectral_oracle() {
    // (e^{-tH} 1)(0) from the discrete operator, extrapolated in h
    let t = 0.25;
    let zero = Potential::zero(-1.0, 1.0).unwrap();
    let oracle: Vec<f64> = [255usize, 511]
        .iter()
        .map(|&n| {
            let op = assemble_operator(&Grid::new(-1.0, 1.0, n).unwrap(), 1.0, &zero).unwrap();
            survival_oracle(&op, t, n / 2).unwrap()
        })
        .collect();
    let exact = richardson(oracle[0], oracle[1], 2.0, 1.0);
    assert!((oracle[1] - exact).abs() < 1e-3);

    let cfg = PathConfig { alpha: 1.0, t_final: t, n_steps: 512, a: -1.0, b: 1.0, seed: 5 };
    let est = &estimate_gt(&[0.0], &zero, &cfg, 40_000).unwrap()[0];
    let tol = 4.0 * est.stderr + 2e-3;
    assert!((est.mean - exact).abs() <= tol, "MC {} +- {} vs oracle {exact}", est.mean, est.stderr);
}

#[test]
fn estimates_are_reproducible_and_seed_sensitive() {
    let v = Potential::power_well(2.0, 2.0, -1.0, 1.0, 0.0).unwrap();
    let cfg = PathConfig { alpha: 1.3, t_final: 0.4, n_steps: 32, a: -1.0, b: 1.0, seed: 77 };
    let xs = [-0.5, 0.0, 0.5];
    let a = estimate_gt(&xs, &v, &cfg, 5_000).unwrap();
    let b = estimate_gt(&xs, &v, &cfg, 5_000).unwrap();
    assert_eq!(a, b);
    let other = PathConfig { seed: 78, ..cfg };
    let c = estimate_gt(&xs, &v, &other, 5_000).unwrap();
    assert_ne!(a, c);
    for e in &a {
        assert!(e.mean > 0.0 && e.mean < 1.0);
    }
}
