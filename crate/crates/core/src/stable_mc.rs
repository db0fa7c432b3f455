//! Monte Carlo for the killed symmetric α-stable process, realized as
//! Brownian motion run with twice the standard speed and time-changed by an
//! independent `α/2`-stable subordinator.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::constants::check_alpha_open;
use crate::numerics::{integrate_1d_with_breaks, QuadConfig};
use crate::potentials::Potential;
use crate::scalar::Real;

/// Samples per parallel work unit; fixed so that the reduction order does
/// not depend on the thread count.
const CHUNK: usize = 4096;

/// Generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One increment over `dt` of the positive stable subordinator of index
/// `beta ∈ (0,1)`, with `E e^{−u η} = e^{−dt u^β}` (Kanter's representation).
pub fn sample_subordinator_increment<T: Real, R: Rng + ?Sized>(beta: T, dt: T, rng: &mut R) -> T {
    let u: f64 = rng.sample(Open01);
    let w: f64 = rng.sample(Exp1);
    let b = beta.to_f64_lossy();
    let theta = std::f64::consts::PI * u;
    let s = (b * theta).sin() / theta.sin().powf(1.0 / b) * (((1.0 - b) * theta).sin() / w).powf((1.0 - b) / b);
    dt.powf(beta.recip()) * T::lit(s)
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1.0;
        let d = v - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (v - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if o.n == 0.0 {
            return self;
        }
        if self.n == 0.0 {
            return o;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments { n, mean: self.mean + d * o.n / n, m2: self.m2 + o.m2 + d * d * self.n * o.n / n }
    }

    fn stderr(&self) -> f64 {
        if self.n < 2.0 {
            0.0
        } else {
            (self.m2 / (self.n - 1.0) / self.n).sqrt()
        }
    }
}

/// Mean and standard error of `sample(i, rng)` over `n` draws, where draws
/// are grouped in fixed chunks and chunk `j` uses stream `j` of `seed`.
fn chunked_mean<F>(n: usize, seed: u64, sample: F) -> (f64, f64)
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|j| {
            let mut rng = stream_rng(seed, j as u64);
            let mut m = Moments::default();
            for _ in 0..CHUNK.min(n - j * CHUNK) {
                m.push(sample(&mut rng));
            }
            m
        })
        .collect();
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    (total.mean, total.stderr())
}

/// Monte Carlo check of `E e^{−u η_dt} = e^{−dt u^{α/2}}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaplaceCheck {
    pub alpha: f64,
    pub dt: f64,
    pub u: f64,
    pub mean: f64,
    pub stderr: f64,
    pub exact: f64,
    /// `|mean − exact| / stderr`.
    pub z: f64,
}

pub fn laplace_check(alpha: f64, dt: f64, u: f64, n_samples: usize, seed: u64) -> Result<LaplaceCheck> {
    check_alpha_open(alpha)?;
    if !(dt > 0.0 && u >= 0.0) || n_samples < 2 {
        return Err(Error::Domain("laplace check needs dt > 0, u >= 0 and two samples".into()));
    }
    let beta = 0.5 * alpha;
    let (mean, stderr) = chunked_mean(n_samples, seed, |rng| (-u * sample_subordinator_increment(beta, dt, rng)).exp());
    let exact = (-dt * u.powf(beta)).exp();
    Ok(LaplaceCheck { alpha, dt, u, mean, stderr, exact, z: (mean - exact).abs() / stderr })
}

/// Time grid and killing interval of a Feynman–Kac simulation.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct PathConfig<T> {
    pub alpha: T,
    pub t_final: T,
    pub n_steps: usize,
    pub a: T,
    pub b: T,
    pub seed: u64,
}

impl<T: Real> PathConfig<T> {
    pub fn validate(&self) -> Result<()> {
        check_alpha_open(self.alpha)?;
        if !(self.t_final > T::zero()) || self.n_steps == 0 {
            return Err(Error::Domain("path config needs t_final > 0 and n_steps >= 1".into()));
        }
        if !(self.a < self.b) {
            return Err(Error::Domain(format!("invalid interval ({}, {})", self.a, self.b)));
        }
        Ok(())
    }
}

/// One path of `exp(−∫₀ᵗ V(X_s) ds) 1{X stays in (a,b)}` started at `x`,
/// killed when a grid position leaves the interval.
pub fn simulate_killed_fk<T: Real, R: Rng + ?Sized>(x: T, v: &Potential<T>, cfg: &PathConfig<T>, rng: &mut R) -> T {
    let dt = cfg.t_final / T::from_usize_lossy(cfg.n_steps);
    let beta = T::lit(0.5) * cfg.alpha;
    let two = T::lit(2.0);
    let mut pos = x;
    let mut action = T::zero();
    for _ in 0..cfg.n_steps {
        action = action + v.eval(pos) * dt;
        let eta = sample_subordinator_increment(beta, dt, rng);
        let z: f64 = rng.sample(StandardNormal);
        pos = pos + (two * eta).sqrt() * T::lit(z);
        if !(pos > cfg.a && pos < cfg.b) {
            return T::zero();
        }
    }
    (-action).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct PathEstimate<T> {
    pub x: T,
    pub mean: T,
    pub stderr: T,
    pub n_paths: usize,
    pub n_steps: usize,
}

/// Decorrelates the seed used for start point `j`.
fn point_seed(seed: u64, j: usize) -> u64 {
    seed ^ (j as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Independent-path estimates of `g_t(x)` at every point; path `i` of point
/// `j` is a pure function of `(seed, j, i)`.
pub fn estimate_gt<T: Real>(
    x_points: &[T],
    v: &Potential<T>,
    cfg: &PathConfig<T>,
    n_paths: usize,
) -> Result<Vec<PathEstimate<T>>> {
    cfg.validate()?;
    if n_paths < 2 {
        return Err(Error::Domain("need at least two paths".into()));
    }
    if let Some(x) = x_points.iter().find(|&&x| !(x > cfg.a && x < cfg.b)) {
        return Err(Error::Domain(format!("start point {x} is not interior")));
    }
    Ok(x_points
        .iter()
        .enumerate()
        .map(|(j, &x)| {
            let seed = point_seed(cfg.seed, j);
            let chunks = n_paths.div_ceil(CHUNK);
            let parts: Vec<Moments> = (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut m = Moments::default();
                    for i in c * CHUNK..((c + 1) * CHUNK).min(n_paths) {
                        let mut rng = stream_rng(seed, i as u64);
                        m.push(simulate_killed_fk(x, v, cfg, &mut rng).to_f64_lossy());
                    }
                    m
                })
                .collect();
            let total = parts.into_iter().fold(Moments::default(), Moments::merge);
            PathEstimate {
                x,
                mean: T::lit(total.mean),
                stderr: T::lit(total.stderr()),
                n_paths,
                n_steps: cfg.n_steps,
            }
        })
        .collect())
}

/// Largest excess, in combined standard errors, by which adjacent estimates
/// break "nondecreasing up to the midpoint, nonincreasing after".
pub fn unimodality_excess<T: Real>(est: &[PathEstimate<T>], mid: T) -> T {
    let mut worst = T::zero();
    for w in est.windows(2) {
        let (p, q) = (&w[0], &w[1]);
        let drop = if q.x <= mid {
            p.mean - q.mean
        } else if p.x >= mid {
            q.mean - p.mean
        } else {
            T::zero()
        };
        let se = (p.stderr * p.stderr + q.stderr * q.stderr).sqrt();
        if drop > T::zero() {
            let z = if se > T::zero() { drop / se } else { T::infinity() };
            worst = worst.max(z);
        }
    }
    worst
}

/// Raw estimates over a sequence of step counts, with an extrapolated value
/// when the three finest levels converge monotonically.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct RefinementStudy<T> {
    pub estimates: Vec<PathEstimate<T>>,
    pub observed_order: Option<T>,
    pub extrapolated: Option<T>,
}

/// `n_steps_list` must grow by a factor of 4 between levels.
pub fn refinement_study<T: Real>(
    x: T,
    v: &Potential<T>,
    cfg: &PathConfig<T>,
    n_steps_list: &[usize],
    n_paths: usize,
) -> Result<RefinementStudy<T>> {
    if n_steps_list.windows(2).any(|w| w[1] != 4 * w[0]) || n_steps_list.is_empty() {
        return Err(Error::Domain("step counts must grow by a factor of 4".into()));
    }
    let mut estimates = Vec::with_capacity(n_steps_list.len());
    for &n_steps in n_steps_list {
        let c = PathConfig { n_steps, ..cfg.clone() };
        estimates.extend(estimate_gt(&[x], v, &c, n_paths)?);
    }
    let k = estimates.len();
    let (mut observed_order, mut extrapolated) = (None, None);
    if k >= 3 {
        let (v1, v2, v3) = (estimates[k - 3].mean, estimates[k - 2].mean, estimates[k - 1].mean);
        let q = (v1 - v2) / (v2 - v3);
        if q > T::one() && q.is_finite() {
            let p = q.ln() / T::lit(4.0).ln();
            observed_order = Some(p);
            extrapolated = Some(v3 + (v3 - v2) / (q - T::one()));
        }
    }
    Ok(RefinementStudy { estimates, observed_order, extrapolated })
}

/// `q(s, z) = (4πs)^{−1/2} e^{−z²/(4s)}`.
pub fn heat_kernel<T: Real>(s: T, z: T) -> T {
    let four = T::lit(4.0);
    (four * T::PI() * s).sqrt().recip() * (-(z * z) / (four * s)).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct PhiChain<T> {
    pub n: usize,
    pub x: Vec<T>,
    pub values: Vec<T>,
    pub error_estimates: Vec<T>,
    /// Largest violation of unimodality beyond the quadrature errors.
    pub max_violation: T,
    pub unimodal: bool,
}

/// `Φ_n(x) = ∫…∫ Π q(s_i, x_i − x_{i−1}) e^{−t_i V(x_i)} dx_1…dx_n`,
/// `x_0 = x`, over the potential's interval, for `n ∈ {1, 2}`.
pub fn phi_chain_quadrature<T: Real>(
    n: usize,
    s: &[T],
    t: &[T],
    v: &Potential<T>,
    x_points: &[T],
    cfg: &QuadConfig<T>,
) -> Result<PhiChain<T>> {
    if !(n == 1 || n == 2) || s.len() < n || t.len() < n {
        return Err(Error::Domain("phi chain supports n in {1, 2} with n times s_i, t_i".into()));
    }
    if s[..n].iter().chain(&t[..n]).any(|&p| !(p > T::zero())) {
        return Err(Error::Domain("s_i and t_i must be positive".into()));
    }
    let (a, b) = (v.a, v.b);
    let mid = v.midpoint();
    let pieces = 8;
    let base: Vec<T> = (0..=pieces)
        .map(|k| a + (b - a) * T::from_usize_lossy(k) / T::from_usize_lossy(pieces))
        .collect();
    let breaks_at = |x: T| {
        let mut br = base.clone();
        if x > a && x < b {
            br.push(x);
        }
        br.sort_by(|p, q| p.partial_cmp(q).unwrap_or(std::cmp::Ordering::Equal));
        br.dedup();
        br
    };
    let inner_cfg = cfg.with_tolerances(cfg.abs_tol * T::lit(0.01), cfg.rel_tol * T::lit(0.01));
    let phi1 = |x: T, s1: T, t1: T, c: &QuadConfig<T>| {
        integrate_1d_with_breaks(|y: T| heat_kernel(s1, y - x) * (-t1 * v.eval(y)).exp(), &breaks_at(x), c)
    };

    let results: Vec<Result<(T, T)>> = x_points
        .par_iter()
        .map(|&x| {
            let fv = if n == 1 {
                phi1(x, s[0], t[0], cfg)?
            } else {
                integrate_1d_with_breaks(
                    |x1: T| {
                        let inner = phi1(x1, s[1], t[1], &inner_cfg).map(|r| r.value).unwrap_or(T::nan());
                        heat_kernel(s[0], x1 - x) * (-t[0] * v.eval(x1)).exp() * inner
                    },
                    &breaks_at(x),
                    cfg,
                )?
            };
            Ok((fv.value, fv.error_estimate))
        })
        .collect();
    let mut values = Vec::with_capacity(x_points.len());
    let mut errors = Vec::with_capacity(x_points.len());
    for r in results {
        let (val, err) = r?;
        values.push(val);
        errors.push(err);
    }

    let mut max_violation = T::zero();
    for i in 0..x_points.len().saturating_sub(1) {
        let (x0, x1) = (x_points[i], x_points[i + 1]);
        let drop = if x1 <= mid {
            values[i] - values[i + 1]
        } else if x0 >= mid {
            values[i + 1] - values[i]
        } else {
            T::zero()
        };
        max_violation = max_violation.max(drop - errors[i] - errors[i + 1]);
    }
    Ok(PhiChain {
        n,
        x: x_points.to_vec(),
        values,
        error_estimates: errors,
        unimodal: max_violation <= T::zero(),
        max_violation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelPoint {
    pub x: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub exact: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CauchyKernelReport {
    pub t: f64,
    pub points: Vec<KernelPoint>,
    /// Smallest `C ≥ 1` with `C^{−1} env ≤ p ≤ C env`,
    /// `env = t/x² ∧ 1/t`, over the sampled points.
    pub envelope_constant: f64,
    pub passed: bool,
}

/// Subordination estimate of the `α = 1` transition density
/// `p(t, x) = E q(η_t, x)` against `t/(π(t² + x²))`.
pub fn cauchy_kernel_check(t: f64, x_points: &[f64], n_samples: usize, seed: u64) -> Result<CauchyKernelReport> {
    if !(t > 0.0) || n_samples < 2 {
        return Err(Error::Domain("kernel check needs t > 0 and two samples".into()));
    }
    let mut points = Vec::with_capacity(x_points.len());
    let mut envelope_constant: f64 = 1.0;
    for (j, &x) in x_points.iter().enumerate() {
        let (estimate, stderr) =
            chunked_mean(n_samples, point_seed(seed, j), |rng| heat_kernel(sample_subordinator_increment(0.5, t, rng), x));
        let exact = t / (std::f64::consts::PI * (t * t + x * x));
        let z = (estimate - exact).abs() / stderr;
        let env = if x == 0.0 { 1.0 / t } else { (t / (x * x)).min(1.0 / t) };
        envelope_constant = envelope_constant.max(estimate / env).max(env / estimate);
        points.push(KernelPoint { x, estimate, stderr, exact, z });
    }
    let passed = points.iter().all(|p| p.z <= 3.0) && envelope_constant.is_finite();
    Ok(CauchyKernelReport { t, points, envelope_constant, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subordinator_is_positive_and_scales() {
        let mut r1 = stream_rng(1, 0);
        let mut r2 = stream_rng(1, 0);
        for _ in 0..1000 {
            let a: f64 = sample_subordinator_increment(0.75, 1.0, &mut r1);
            let b: f64 = sample_subordinator_increment(0.75, 0.5, &mut r2);
            assert!(a > 0.0);
            assert!((b - 0.5f64.powf(1.0 / 0.75) * a).abs() <= 1e-12 * a.max(1.0));
        }
    }

    #[test]
    fn laplace_transform_small() {
        let r = laplace_check(1.0, 1.0, 1.0, 100_000, 3).unwrap();
        assert!(r.z < 4.0, "{r:?}");
    }

    #[test]
    fn constant_potential_factors_out() {
        let cfg = PathConfig::<f64> { alpha: 1.5, t_final: 0.3, n_steps: 32, a: -1.0, b: 1.0, seed: 9 };
        let zero = Potential::zero(-1.0, 1.0).unwrap();
        let c = Potential::constant(-1.0, 1.0, 2.0).unwrap();
        for i in 0..200u64 {
            let p0 = simulate_killed_fk(0.1, &zero, &cfg, &mut stream_rng(9, i));
            let pc = simulate_killed_fk(0.1, &c, &cfg, &mut stream_rng(9, i));
            assert!((pc - (-2.0f64 * 0.3).exp() * p0).abs() < 1e-12);
        }
    }

    #[test]
    fn short_time_survival() {
        let cfg = PathConfig { alpha: 1.0, t_final: 1e-6, n_steps: 4, a: -1.0, b: 1.0, seed: 5 };
        let est = estimate_gt(&[0.0], &Potential::zero(-1.0, 1.0).unwrap(), &cfg, 10_000).unwrap();
        assert!(est[0].mean > 0.999);
    }

    #[test]
    fn deterministic_given_seed() {
        let cfg = PathConfig { alpha: 1.2, t_final: 0.5, n_steps: 16, a: -1.0, b: 1.0, seed: 11 };
        let v = Potential::power_well(1.0, 2.0, -1.0, 1.0, 0.0).unwrap();
        let a = estimate_gt(&[-0.3, 0.0, 0.4], &v, &cfg, 5000).unwrap();
        let b = estimate_gt(&[-0.3, 0.0, 0.4], &v, &cfg, 5000).unwrap();
        assert_eq!(a, b);
        for e in &a {
            assert!(e.mean >= 0.0 && e.mean <= 1.0 && e.stderr >= 0.0);
        }
    }

    #[test]
    fn moments_merge_matches_direct() {
        let data: Vec<f64> = (0..100).map(|i| ((i * 37) % 11) as f64 * 0.3).collect();
        let mut all = Moments::default();
        data.iter().for_each(|&v| all.push(v));
        let (mut l, mut r) = (Moments::default(), Moments::default());
        data[..37].iter().for_each(|&v| l.push(v));
        data[37..].iter().for_each(|&v| r.push(v));
        let m = l.merge(r);
        assert!((m.mean - all.mean).abs() < 1e-13);
        assert!((m.m2 - all.m2).abs() < 1e-10);
    }

    #[test]
    fn phi1_free_case_is_gaussian_mass() {
        let v = Potential::<f64>::zero(-1.0, 1.0).unwrap();
        let xs = [-0.5, 0.0, 0.5];
        let r = phi_chain_quadrature(1, &[0.1], &[0.5], &v, &xs, &QuadConfig::one_dim()).unwrap();
        assert!(r.unimodal);
        assert!(r.values[1] > r.values[0]);
        assert!((r.values[0] - r.values[2]).abs() < 1e-12);
    }

    #[test]
    fn phi_chain_domain() {
        let v = Potential::zero(-1.0, 1.0).unwrap();
        assert!(phi_chain_quadrature(3, &[0.1; 3], &[0.1; 3], &v, &[0.0], &QuadConfig::one_dim()).is_err());
        assert!(phi_chain_quadrature(1, &[0.0], &[0.1], &v, &[0.0], &QuadConfig::one_dim()).is_err());
    }

    #[test]
    fn unimodality_excess_flags_dip() {
        let mk = |x: f64, mean: f64| PathEstimate { x, mean, stderr: 0.01, n_paths: 10, n_steps: 1 };
        let good = [mk(-0.5, 0.2), mk(0.0, 0.5), mk(0.5, 0.2)];
        assert_eq!(unimodality_excess(&good, 0.0), 0.0);
        let bad = [mk(-0.5, 0.5), mk(0.0, 0.2), mk(0.5, 0.5)];
        assert!(unimodality_excess(&bad, 0.0) > 20.0);
    }
}
