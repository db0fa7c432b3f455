//! Fractional Poincaré inequality on an interval: direct check, the
//! constructive witness recursion, the weighted variant and the `α < 1`
//! counterexample family.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{
    integrate_1d_with_breaks, poincare_constant, singular_double_integral_with_breaks, witness_ratio, PiecewiseLinear,
    QuadConfig,
};
use crate::numerics::constants::{check_alpha_above_one, check_alpha_open};
use crate::scalar::Real;

type RealFn<'a, T> = &'a (dyn Fn(T) -> T + Sync);

/// Allowed `|f(a)|` for the boundary condition.
pub const BOUNDARY_TOL: f64 = 1e-10;
/// Slack in `lhs ≥ rhs`.
pub const INEQUALITY_SLACK: f64 = 1e-12;
pub const DEFAULT_ROOT_TOL: f64 = 1e-9;

/// Points of the uniform mesh used to estimate Lipschitz constants and to
/// check monotonicity of weights.
const SAMPLE_POINTS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct PoincareResult<T> {
    pub lhs: T,
    pub lhs_error: T,
    pub rhs: T,
    /// `lhs/rhs`, absent when `rhs = 0`.
    pub ratio: Option<T>,
    pub passed: bool,
}

impl<T: Real> PoincareResult<T> {
    fn new(lhs: T, lhs_error: T, rhs: T) -> Self {
        Self {
            lhs,
            lhs_error,
            rhs,
            ratio: (rhs > T::zero()).then(|| lhs / rhs),
            passed: lhs >= rhs - T::lit(INEQUALITY_SLACK),
        }
    }
}

fn sample_mesh<T: Real>(a: T, b: T, breaks: &[T]) -> Vec<T> {
    let mut xs: Vec<T> = (0..=SAMPLE_POINTS)
        .map(|i| a + (b - a) * T::from_usize_lossy(i) / T::from_usize_lossy(SAMPLE_POINTS))
        .collect();
    xs.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap_or(std::cmp::Ordering::Equal));
    xs.dedup();
    xs
}

/// Largest difference quotient of `f` over a uniform mesh merged with
/// `breaks`. Exact for piecewise-linear `f` whose kinks are in `breaks`.
pub fn estimate_lipschitz<T: Real>(f: RealFn<'_, T>, a: T, b: T, breaks: &[T]) -> T {
    let xs = sample_mesh(a, b, breaks);
    let ys: Vec<T> = xs.iter().map(|&x| f(x)).collect();
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| ((y[1] - y[0]) / (x[1] - x[0])).abs())
        .fold(T::zero(), |m, q| if q.is_nan() { T::infinity() } else { m.max(q) })
}

/// `∬ (f(x)−f(y))²/|x−y|^{1+α} ≥ C⁽⁴⁾_α f(b)²/(b−a)^{α−1}` when `f(a) = 0`;
/// with `mirrored`, `f(b) = 0` is required and `f(a)` takes the place of
/// `f(b)`.
pub fn poincare_check<T: Real>(
    f: RealFn<'_, T>,
    breaks: &[T],
    alpha: T,
    a: T,
    b: T,
    mirrored: bool,
    cfg: &QuadConfig<T>,
) -> Result<PoincareResult<T>> {
    check_alpha_above_one(alpha)?;
    if !(a < b) {
        return Err(Error::Domain(format!("invalid interval ({a}, {b})")));
    }
    let (anchor, far) = if mirrored { (b, a) } else { (a, b) };
    let f0 = f(anchor);
    if !(f0.abs() <= T::lit(BOUNDARY_TOL)) {
        return Err(Error::Precondition(format!("f must vanish at {anchor}, got {f0}")));
    }
    let lip = estimate_lipschitz(f, a, b, breaks);
    if !lip.is_finite() {
        return Err(Error::Precondition("f is not Lipschitz on the sampling mesh".into()));
    }
    let lhs = singular_double_integral_with_breaks(f, None, alpha, a, b, breaks, cfg)?;
    let fb = f(far);
    let rhs = poincare_constant(alpha)? * fb * fb / (b - a).powf(alpha - T::one());
    Ok(PoincareResult::new(lhs.value, lhs.error_estimate, rhs))
}

/// Affine transport of `f` on `[a, b]` to `[0, 1]`, with the factor
/// `(b−a)^{α−1}`: `lhs(f, [a,b]) = lhs(f̃, [0,1]) / factor`.
pub fn rescale_unit<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, alpha: T) -> Result<(impl Fn(T) -> T, T)> {
    if !(a < b) {
        return Err(Error::Domain(format!("invalid interval ({a}, {b})")));
    }
    check_alpha_open(alpha)?;
    let len = b - a;
    Ok((move |x: T| f(len * x + a), len.powf(alpha - T::one())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Left,
    Right,
    Terminal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct WitnessStep<T> {
    pub n: usize,
    pub a_n: T,
    pub b_n: T,
    pub x_n: T,
    pub y_n: T,
    pub f_x_n: T,
    pub f_y_n: T,
    pub m_n: Option<T>,
    #[serde(rename = "M_n")]
    pub big_m_n: Option<T>,
    pub branch: Branch,
}

/// Record of the nested-interval recursion for `f` normalized to
/// `f(0) = 0`, `f(1) = 1` on the unit interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct WitnessCertificate<T> {
    pub alpha: T,
    pub c: T,
    pub root_tol: T,
    pub lipschitz: T,
    pub steps: Vec<WitnessStep<T>>,
    pub n0: usize,
    /// `[a_{n0}, x_{n0}] × [y_{n0}, b_{n0}]`.
    pub rectangle: [T; 4],
    /// `(c/3)² (1/(9c^{α−1}))^{n0−1}`.
    pub certified_bound: T,
    /// The rectangle's own contribution
    /// `3^{−2n0} (x−a)(b−y)/(b−a)^{1+α}`.
    pub rectangle_bound: T,
}

/// Runs the recursion on `f` with `f(0) = 0`, `f(1) = 1` and Lipschitz
/// constant at most `lipschitz`.
///
/// Level sets are located by a Lipschitz exclusion scan: from a point where
/// `|f − L| = r`, no root lies within `r/Lip`, so the scan advances by
/// `max(r/Lip, root_tol)` and bisects any bracketed sign change down to
/// `root_tol`.
pub fn witness_search<T: Real>(f: RealFn<'_, T>, alpha: T, lipschitz: T, root_tol: T) -> Result<WitnessCertificate<T>> {
    check_alpha_above_one(alpha)?;
    let tol = T::lit(BOUNDARY_TOL);
    if !((f(T::zero())).abs() <= tol) || !((f(T::one()) - T::one()).abs() <= tol) {
        return Err(Error::Precondition("witness search needs f(0) = 0 and f(1) = 1".into()));
    }
    if !(lipschitz > T::zero() && lipschitz.is_finite()) {
        return Err(Error::Precondition(format!("Lipschitz constant must be positive and finite, got {lipschitz}")));
    }
    if !(root_tol > T::zero()) {
        return Err(Error::Domain("root_tol must be positive".into()));
    }
    let c = witness_ratio(alpha)?;
    let three = T::lit(3.0);
    let cap_f = (alpha - T::one()) * (lipschitz / root_tol).ln() / three.ln();
    let cap = cap_f.max(T::zero()).ceil().to_usize().unwrap_or(0) + 10;

    let (mut a_n, mut b_n) = (T::zero(), T::one());
    let (mut fa, mut fb) = (T::zero(), T::one());
    let mut steps = Vec::new();
    for n in 1..=cap {
        let nn = T::from_usize_lossy(n);
        let cn = c.powf(nn);
        let shift = three.powf(-nn);
        let x_n = a_n + cn;
        let y_n = b_n - cn;
        let f_x = fa + shift;
        let f_y = fb - shift;
        let m_n = level_set_min(f, f_x, a_n, b_n, lipschitz, root_tol);
        let big_m = level_set_max(f, f_y, a_n, b_n, lipschitz, root_tol);
        let left = m_n.is_some_and(|m| m > a_n && m < x_n);
        let right = big_m.is_some_and(|m| m > y_n && m < b_n);
        let branch = if left {
            Branch::Left
        } else if right {
            Branch::Right
        } else {
            Branch::Terminal
        };
        steps.push(WitnessStep { n, a_n, b_n, x_n, y_n, f_x_n: f_x, f_y_n: f_y, m_n, big_m_n: big_m, branch });
        match branch {
            Branch::Terminal => {
                let ratio = c / three;
                let growth = T::one() / (T::lit(9.0) * c.powf(alpha - T::one()));
                let certified_bound = ratio * ratio * growth.powf(nn - T::one());
                let rectangle_bound =
                    shift * shift * (x_n - a_n) * (b_n - y_n) / (b_n - a_n).powf(T::one() + alpha);
                return Ok(WitnessCertificate {
                    alpha,
                    c,
                    root_tol,
                    lipschitz,
                    steps,
                    n0: n,
                    rectangle: [a_n, x_n, y_n, b_n],
                    certified_bound,
                    rectangle_bound,
                });
            }
            _ if cn < root_tol => {
                return Err(Error::TerminationFailure {
                    cap,
                    reason: format!("step {n}: sub-interval length {cn} is below root_tol {root_tol}"),
                });
            }
            Branch::Left => {
                b_n = x_n;
                fb = f_x;
            }
            Branch::Right => {
                a_n = y_n;
                fa = f_y;
            }
        }
    }
    Err(Error::TerminationFailure { cap, reason: "step cap reached".into() })
}

/// Certificate for general Lipschitz `f` on `[a, b]` with `f(a) = 0` and
/// `f(b) ≠ 0`: rescaled to the unit interval and divided by `f(b)`.
pub fn certify<T: Real>(
    f: RealFn<'_, T>,
    breaks: &[T],
    alpha: T,
    a: T,
    b: T,
    root_tol: T,
) -> Result<WitnessCertificate<T>> {
    if !(a < b) {
        return Err(Error::Domain(format!("invalid interval ({a}, {b})")));
    }
    let fb = f(b);
    if fb == T::zero() || !fb.is_finite() {
        return Err(Error::Precondition("normalization needs f(b) != 0".into()));
    }
    let lip = estimate_lipschitz(f, a, b, breaks) * (b - a) / fb.abs();
    let len = b - a;
    let g = move |x: T| f(len * x + a) / fb;
    witness_search(&g, alpha, lip, root_tol)
}

fn level_set_min<T: Real>(f: RealFn<'_, T>, level: T, lo: T, hi: T, lip: T, tol: T) -> Option<T> {
    scan(f, level, lo, hi, lip, tol, true)
}

fn level_set_max<T: Real>(f: RealFn<'_, T>, level: T, lo: T, hi: T, lip: T, tol: T) -> Option<T> {
    scan(f, level, lo, hi, lip, tol, false)
}

/// First root of `f − level` in `(lo, hi)` seen from the left (or from the
/// right when `forward` is false), as the midpoint of a bracket of width at
/// most `tol`.
fn scan<T: Real>(f: RealFn<'_, T>, level: T, lo: T, hi: T, lip: T, tol: T, forward: bool) -> Option<T> {
    let g = |x: T| f(x) - level;
    let (start, end) = if forward { (lo, hi) } else { (hi, lo) };
    let dir = if forward { T::one() } else { -T::one() };
    let mut x = start;
    let mut gx = g(x);
    loop {
        let step = (gx.abs() / lip).max(tol);
        let mut next = x + dir * step;
        let last = if forward { next >= end } else { next <= end };
        if last {
            next = end;
        }
        let gn = g(next);
        if gn == T::zero() {
            // a root on the excluded far endpoint does not count
            if last {
                return None;
            }
            return Some(next);
        }
        // a root on the excluded start point gives no bracket
        let at_start_root = x == start && gx == T::zero();
        if !at_start_root && (gx < T::zero()) != (gn < T::zero()) {
            return Some(bisect(&g, x, next, tol));
        }
        if last {
            return None;
        }
        x = next;
        gx = gn;
    }
}

fn bisect<T: Real, G: Fn(T) -> T>(g: &G, mut p: T, mut q: T, tol: T) -> T {
    let neg_p = g(p) < T::zero();
    while (q - p).abs() > tol {
        let mid = T::lit(0.5) * (p + q);
        let gm = g(mid);
        if gm == T::zero() {
            return mid;
        }
        if (gm < T::zero()) == neg_p {
            p = mid;
        } else {
            q = mid;
        }
    }
    T::lit(0.5) * (p + q)
}

/// Weighted form: `∬ (f(x)−f(y))²/|x−y|^{1+α} g(x)g(y) ≥
/// C⁽⁴⁾_α/(b−a)^α ∫ f² g²` for nonincreasing positive `g`.
pub fn weighted_poincare_check<T: Real>(
    f: RealFn<'_, T>,
    g: RealFn<'_, T>,
    breaks: &[T],
    alpha: T,
    a: T,
    b: T,
    cfg: &QuadConfig<T>,
) -> Result<PoincareResult<T>> {
    check_alpha_above_one(alpha)?;
    if !(a < b) {
        return Err(Error::Domain(format!("invalid interval ({a}, {b})")));
    }
    let f0 = f(a);
    if !(f0.abs() <= T::lit(BOUNDARY_TOL)) {
        return Err(Error::Precondition(format!("f must vanish at {a}, got {f0}")));
    }
    let xs = sample_mesh(a, b, breaks);
    let gs: Vec<T> = xs.iter().map(|&x| g(x)).collect();
    let slack = T::lit(1e-12);
    if let Some(i) = (0..xs.len() - 1).find(|&i| gs[i + 1] > gs[i] + slack * T::one().max(gs[i].abs())) {
        return Err(Error::Precondition(format!(
            "weight increases between {} and {}",
            xs[i], xs[i + 1]
        )));
    }
    if let Some(i) = (0..xs.len() - 1).find(|&i| !(gs[i] > T::zero())) {
        return Err(Error::Precondition(format!("weight is not positive at {}", xs[i])));
    }
    let lhs = singular_double_integral_with_breaks(f, Some(g), alpha, a, b, breaks, cfg)?;
    let mut pts: Vec<T> = vec![a];
    pts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    pts.push(b);
    pts.sort_by(|p, q| p.partial_cmp(q).unwrap_or(std::cmp::Ordering::Equal));
    pts.dedup();
    let mass = integrate_1d_with_breaks(
        |x: T| {
            let v = f(x) * g(x);
            v * v
        },
        &pts,
        &QuadConfig::one_dim(),
    )?;
    let rhs = poincare_constant(alpha)? / (b - a).powf(alpha) * mass.value;
    Ok(PoincareResult::new(lhs.value, lhs.error_estimate, rhs))
}

/// Smooth monotone step: 0 below 0, 1 above 1,
/// `e^{−1/t}/(e^{−1/t} + e^{−1/(1−t)})` in between.
pub fn smooth_step<T: Real>(t: T) -> T {
    if t <= T::zero() {
        T::zero()
    } else if t >= T::one() {
        T::one()
    } else {
        T::one() / (T::one() + (T::one() / t - T::one() / (T::one() - t)).exp())
    }
}

/// `f_n(x) = S(4(n x − 1/4))`: rises from 0 to 1 on `[1/(4n), 1/(2n)]`.
pub fn counterexample_profile<T: Real>(n: usize, x: T) -> T {
    let nn = T::from_usize_lossy(n);
    smooth_step(T::lit(4.0) * (nn * x - T::lit(0.25)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct CounterexampleRow<T> {
    pub n: usize,
    pub j_n: T,
    pub error_estimate: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct CounterexampleScan<T> {
    pub alpha: T,
    pub rows: Vec<CounterexampleRow<T>>,
    /// Least-squares slope of `log J_n` against `log n`.
    pub slope: T,
    pub strictly_decreasing: bool,
}

/// Pieces each transition layer is split into for the quadrature hints.
const TRANSITION_PIECES: usize = 16;

/// `J_n = ∬_{[0,1]²} (f_n(x)−f_n(y))²/|x−y|^{1+α}` for `α ∈ (0, 1)`.
pub fn counterexample_scan<T: Real>(alpha: T, n_list: &[usize], cfg: &QuadConfig<T>) -> Result<CounterexampleScan<T>> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::Domain(format!("counterexample needs alpha in (0, 1), got {alpha}")));
    }
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) || n_list[0] == 0 {
        return Err(Error::Domain("n_list must be a nonempty increasing list of positive integers".into()));
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let nn = T::from_usize_lossy(n);
        let lo = T::lit(0.25) / nn;
        let hi = T::lit(0.5) / nn;
        let breaks: Vec<T> = (0..=TRANSITION_PIECES)
            .map(|k| lo + (hi - lo) * T::from_usize_lossy(k) / T::from_usize_lossy(TRANSITION_PIECES))
            .collect();
        let f = move |x: T| counterexample_profile(n, x);
        let v = singular_double_integral_with_breaks(&f, None, alpha, T::zero(), T::one(), &breaks, cfg)?;
        rows.push(CounterexampleRow { n, j_n: v.value, error_estimate: v.error_estimate });
    }
    let strictly_decreasing = rows.windows(2).all(|w| w[1].j_n < w[0].j_n);
    let slope = if rows.len() >= 2 {
        let pts: Vec<(T, T)> = rows.iter().map(|r| (T::from_usize_lossy(r.n).ln(), r.j_n.ln())).collect();
        let k = T::from_usize_lossy(pts.len());
        let mx = pts.iter().map(|p| p.0).sum::<T>() / k;
        let my = pts.iter().map(|p| p.1).sum::<T>() / k;
        let sxy = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<T>();
        let sxx = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<T>();
        sxy / sxx
    } else {
        T::nan()
    };
    Ok(CounterexampleScan { alpha, rows, slope, strictly_decreasing })
}

/// Random piecewise-linear `f` on `[a, b]` with `f(a) = 0`, between one
/// and `max_knots` interior knots, values in `[−1, 1]` and `|f(b)| ≥ 0.1`.
pub fn random_campaign_function<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    a: T,
    b: T,
    max_knots: usize,
) -> Result<PiecewiseLinear<T>> {
    if !(a < b) || max_knots == 0 {
        return Err(Error::Domain("need a < b and at least one knot".into()));
    }
    let k = rng.random_range(1..=max_knots);
    let mut ts: Vec<f64> = (0..k).map(|_| rng.random_range(0.02..0.98)).collect();
    ts.sort_by(|p, q| p.total_cmp(q));
    ts.dedup_by(|p, q| *p - *q < 1e-6);
    let len = b - a;
    let mut xs = vec![a];
    let mut ys = vec![T::zero()];
    for &t in &ts {
        xs.push(a + len * T::lit(t));
        ys.push(T::lit(rng.random_range(-1.0..=1.0)));
    }
    let end: f64 = rng.random_range(0.1..=1.0);
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    xs.push(b);
    ys.push(T::lit(sign * end));
    PiecewiseLinear::new(xs, ys)
}

/// Random positive nonincreasing piecewise-linear weight on `[a, b]` with
/// values in `[0.05, 2]`.
pub fn random_nonincreasing_weight<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    a: T,
    b: T,
    max_knots: usize,
) -> Result<PiecewiseLinear<T>> {
    if !(a < b) || max_knots == 0 {
        return Err(Error::Domain("need a < b and at least one knot".into()));
    }
    let k = rng.random_range(1..=max_knots);
    let mut ts: Vec<f64> = (0..k).map(|_| rng.random_range(0.02..0.98)).collect();
    ts.sort_by(|p, q| p.total_cmp(q));
    ts.dedup_by(|p, q| *p - *q < 1e-6);
    let mut vals: Vec<f64> = (0..k + 2).map(|_| rng.random_range(0.05..=2.0)).collect();
    vals.sort_by(|p, q| q.total_cmp(p));
    let len = b - a;
    let mut xs = vec![a];
    xs.extend(ts.iter().map(|&t| a + len * T::lit(t)));
    xs.push(b);
    let ys = vals[..xs.len()].iter().map(|&v| T::lit(v)).collect();
    PiecewiseLinear::new(xs, ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_on_unit_interval() {
        let id = |x: f64| x;
        let r = poincare_check(&id, &[], 1.5, 0.0, 1.0, false, &QuadConfig::double()).unwrap();
        assert!((r.lhs - 2.0 / 0.75).abs() < 1e-5);
        assert!((r.rhs - 1.693_508_780_843_028_7e-5).abs() < 1e-17);
        assert!(r.passed);
        assert!((r.ratio.unwrap() - 157_464.0).abs() < 1.0);
    }

    #[test]
    fn zero_function_and_mirror() {
        let zero = |_: f64| 0.0;
        let r = poincare_check(&zero, &[], 1.5, 0.0, 1.0, false, &QuadConfig::double()).unwrap();
        assert_eq!((r.lhs, r.rhs, r.passed), (0.0, 0.0, true));
        let down = |x: f64| 1.0 - x;
        assert!(matches!(
            poincare_check(&down, &[], 1.5, 0.0, 1.0, false, &QuadConfig::double()),
            Err(Error::Precondition(_))
        ));
        let r = poincare_check(&down, &[], 1.5, 0.0, 1.0, true, &QuadConfig::double()).unwrap();
        assert!(r.passed && (r.rhs - 1.693_508_780_843_028_7e-5).abs() < 1e-17);
    }

    #[test]
    fn alpha_hypothesis_enforced() {
        let id = |x: f64| x;
        assert!(poincare_check(&id, &[], 0.9, 0.0, 1.0, false, &QuadConfig::double()).is_err());
        assert!(witness_search(&id, 0.9, 1.0, 1e-9).is_err());
    }

    #[test]
    fn identity_terminates_at_first_step() {
        let id = |x: f64| x;
        let cert = witness_search(&id, 1.5, 1.0, 1e-9).unwrap();
        assert_eq!(cert.n0, 1);
        assert!((cert.c - 1.0 / 81.0).abs() < 1e-16);
        let s = &cert.steps[0];
        assert!((s.m_n.unwrap() - 1.0 / 3.0).abs() < 1e-9);
        assert!((s.big_m_n.unwrap() - 2.0 / 3.0).abs() < 1e-9);
        assert_eq!(s.branch, Branch::Terminal);
        assert!((cert.certified_bound - (1.0 / 243.0_f64).powi(2)).abs() < 1e-20);
        assert!(((cert.certified_bound - cert.rectangle_bound) / cert.certified_bound).abs() < 1e-12);
    }

    #[test]
    fn staircase_branches_left() {
        // hugs zero, jumps to 0.9 by x = 0.005, then rises slowly to 1
        let f = |x: f64| {
            if x < 0.004 {
                0.0
            } else if x < 0.005 {
                0.9 * (x - 0.004) / 0.001
            } else {
                0.9 + 0.1 * (x - 0.005) / 0.995
            }
        };
        let cert = witness_search(&f, 1.5, 900.0, 1e-9).unwrap();
        assert_eq!(cert.steps[0].branch, Branch::Left);
        assert!(cert.n0 >= 2);
        assert!(((cert.certified_bound - (1.0 / 243.0_f64).powi(2)) / cert.certified_bound).abs() < 1e-12);
        for (k, s) in cert.steps.iter().enumerate() {
            let len = s.b_n - s.a_n;
            assert!((len - (1.0 / 81.0_f64).powi(k as i32)).abs() < 1e-12);
            assert!((s.f_y_n - s.f_x_n - 3f64.powi(-(k as i32 + 1))).abs() < 1e-12);
        }
    }

    #[test]
    fn non_lipschitz_proxy_fails_or_runs_long() {
        let f = |x: f64| x.powf(0.01);
        let lip = estimate_lipschitz(&f, 0.0, 1.0, &[]);
        match witness_search(&f, 1.5, lip, 1e-6) {
            Err(Error::TerminationFailure { .. }) => {}
            Ok(cert) => assert!(cert.n0 >= 2),
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn rescaling_factor() {
        let (g, factor) = rescale_unit(|x: f64| x, 0.0, 1.0, 1.5).unwrap();
        assert_eq!(factor, 1.0);
        assert_eq!(g(0.3), 0.3);
        let (g2, factor2) = rescale_unit(|x: f64| x, 0.0, 2.0, 1.5).unwrap();
        assert!((factor2 - 2f64.sqrt()).abs() < 1e-15);
        let cfg = QuadConfig::double().with_tolerances(1e-10, 1e-10);
        let direct = poincare_check(&|x: f64| x, &[], 1.5, 0.0, 2.0, false, &cfg).unwrap();
        let unit = poincare_check(&g2, &[], 1.5, 0.0, 1.0, false, &cfg).unwrap();
        assert!(((direct.lhs - unit.lhs / factor2) / direct.lhs).abs() < 1e-6);
        assert!(((direct.rhs - unit.rhs / factor2) / direct.rhs).abs() < 1e-12);
    }

    #[test]
    fn weighted_examples() {
        let cfg = QuadConfig::double();
        let id = |x: f64| x;
        let one = |_: f64| 1.0;
        assert!(weighted_poincare_check(&id, &one, &[], 1.5, 0.0, 1.0, &cfg).unwrap().passed);
        let lin = |x: f64| 1.0 - x;
        assert!(weighted_poincare_check(&id, &lin, &[], 1.5, 0.0, 1.0, &cfg).unwrap().passed);
        let zero = |_: f64| 0.0;
        let r = weighted_poincare_check(&zero, &lin, &[], 1.5, 0.0, 1.0, &cfg).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        let rising = |x: f64| 1.0 + x;
        assert!(matches!(
            weighted_poincare_check(&id, &rising, &[], 1.5, 0.0, 1.0, &cfg),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn smooth_step_profile() {
        assert_eq!(smooth_step(-0.5_f64), 0.0);
        assert_eq!(smooth_step(1.5_f64), 1.0);
        assert!((smooth_step(0.5_f64) - 0.5).abs() < 1e-15);
        for n in [1usize, 2, 8] {
            assert_eq!(counterexample_profile(n, 0.0_f64), 0.0);
            assert_eq!(counterexample_profile(n, 1.0_f64), 1.0);
        }
        let xs: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
        assert!(xs.windows(2).all(|w| counterexample_profile(3, w[1]) >= counterexample_profile(3, w[0])));
    }

    #[test]
    fn counterexample_domain() {
        assert!(counterexample_scan(1.5_f64, &[1, 2], &QuadConfig::double()).is_err());
        assert!(counterexample_scan(0.5_f64, &[2, 1], &QuadConfig::double()).is_err());
    }
}
