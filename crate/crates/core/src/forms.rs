//! The weighted nonlocal Dirichlet form of the ground-state transformed
//! operator, and lower bounds on the spectral gap.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{
    gap_constant, jump_constant, singular_double_integral_with_breaks, FormValue, PiecewiseLinear, QuadConfig,
};
use crate::operator::{lambda_star, Grid, SpectralResult};
use crate::scalar::Real;

/// Nodes where `φ_1 < GROUND_STATE_FLOOR · ‖φ_1‖_∞` are left out of `φ_n/φ_1`.
pub const GROUND_STATE_FLOOR: f64 = 1e-12;

/// Slack allowed when comparing a gap against its lower bound.
pub const GAP_SLACK: f64 = 1e-9;

type RealFn<'a, T> = &'a (dyn Fn(T) -> T + Sync);

/// Piecewise-linear interpolant of nodal values on `grid`, pinned to zero at
/// both endpoints.
pub fn ground_state_interpolant<T: Real>(grid: &Grid<T>, values: &[T]) -> Result<PiecewiseLinear<T>> {
    if values.len() != grid.n {
        return Err(Error::Domain(format!("expected {} nodal values, got {}", grid.n, values.len())));
    }
    let mut xs = Vec::with_capacity(grid.n + 2);
    let mut ys = Vec::with_capacity(grid.n + 2);
    xs.push(grid.a);
    ys.push(T::zero());
    for (i, &v) in values.iter().enumerate() {
        xs.push(grid.node(i + 1));
        ys.push(v);
    }
    xs.push(grid.b);
    ys.push(T::zero());
    PiecewiseLinear::new(xs, ys)
}

/// `(𝒜_{−α}/2) ∬ (f(x) − f(y))² |x − y|^{−1−α} φ_1(x) φ_1(y) dx dy` with
/// `φ_1` interpolated piecewise-linearly from its nodal values.
pub fn weighted_form<T: Real>(
    f: RealFn<'_, T>,
    f_breaks: &[T],
    phi1: &[T],
    grid: &Grid<T>,
    alpha: T,
    cfg: &QuadConfig<T>,
) -> Result<FormValue<T>> {
    let weight = ground_state_interpolant(grid, phi1)?;
    let w = |x: T| weight.eval(x);
    let mut breaks: Vec<T> = weight.breakpoints().to_vec();
    breaks.extend_from_slice(f_breaks);
    let raw = singular_double_integral_with_breaks(f, Some(&w), alpha, grid.a, grid.b, &breaks, cfg)?;
    Ok(raw.scale(T::lit(0.5) * jump_constant(alpha)?))
}

/// Rayleigh quotient of `f = φ_n/φ_1` in the weighted form.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct RayleighGap<T> {
    pub value: T,
    pub error_estimate: T,
    /// Nodes dropped from each end because `φ_1` fell below the floor.
    pub excluded_nodes: usize,
}

/// Approximates `λ_n − λ_1` (`n ≥ 2`, one-based) from the variational
/// formula evaluated at its minimizer `φ_n/φ_1`.
pub fn rayleigh_gap<T: Real>(s: &SpectralResult<T>, n: usize, cfg: &QuadConfig<T>) -> Result<RayleighGap<T>> {
    if n < 2 || n > s.m() {
        return Err(Error::Domain(format!("rayleigh_gap needs 2 <= n <= {}, got {n}", s.m())));
    }
    let grid = s.grid();
    let phi1 = s.ground_state();
    let phin = &s.eigenvectors[n - 1];
    if phi1.iter().any(|&p| !(p > T::zero())) {
        return Err(Error::Precondition("ground state must be positive at every node".into()));
    }
    let sup = phi1.iter().fold(T::zero(), |m, &x| m.max(x));
    let floor = T::lit(GROUND_STATE_FLOOR) * sup;
    let keep: Vec<usize> = (0..grid.n).filter(|&i| phi1[i] >= floor).collect();
    if keep.len() < 2 {
        return Err(Error::Precondition("ground state underflows at almost every node".into()));
    }
    let excluded = grid.n - keep.len();

    let xs: Vec<T> = keep.iter().map(|&i| grid.node(i + 1)).collect();
    let ys: Vec<T> = keep.iter().map(|&i| phin[i] / phi1[i]).collect();
    let f = PiecewiseLinear::new(xs, ys)?;
    let norm = grid.h * keep.iter().map(|&i| phin[i] * phin[i]).sum::<T>();

    let fe = |x: T| f.eval(x);
    let form = weighted_form(&fe, &[], phi1, &grid, s.alpha, cfg)?;
    Ok(RayleighGap {
        value: form.value / norm,
        error_estimate: form.error_estimate / norm,
        excluded_nodes: excluded,
    })
}

/// `(𝒜_{−α}/(b−a)^α, C⁽³⁾_α/(b−a)^α)`; the second is defined for `α ∈ (1,2)`.
pub fn gap_bounds<T: Real>(alpha: T, a: T, b: T) -> Result<(T, Option<T>)> {
    if !(a < b) {
        return Err(Error::Domain(format!("invalid interval ({a}, {b})")));
    }
    let scale = (b - a).powf(alpha);
    let star = jump_constant(alpha)? / scale;
    let main = if alpha > T::one() { Some(gap_constant(alpha)? / scale) } else { None };
    Ok((star, main))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct GapReport<T> {
    pub alpha: T,
    pub a: T,
    pub b: T,
    pub lambda_1: T,
    pub lambda_2: T,
    pub lambda_star: T,
    /// One-based index of the first antisymmetric eigenpair.
    pub star_index: usize,
    pub gap: T,
    pub gap_star: T,
    pub bound_main: Option<T>,
    pub bound_star: T,
    pub rayleigh_value: Option<T>,
    /// `|rayleigh − gap| / gap`.
    pub consistency_gap_vs_rayleigh: Option<T>,
    /// `None` when the main bound does not apply (`α ≤ 1`).
    pub pass_main: Option<bool>,
    pub pass_star: bool,
}

impl<T: Real> GapReport<T> {
    /// Report from eigenvalues alone (e.g. an extrapolated spectrum).
    /// `star_index` is one-based.
    pub fn from_values(alpha: T, a: T, b: T, lambda_1: T, lambda_2: T, lambda_star: T, star_index: usize) -> Result<Self> {
        let (bound_star, bound_main) = gap_bounds(alpha, a, b)?;
        let slack = T::lit(GAP_SLACK);
        let gap = lambda_2 - lambda_1;
        let gap_star = lambda_star - lambda_1;
        Ok(Self {
            alpha,
            a,
            b,
            lambda_1,
            lambda_2,
            lambda_star,
            star_index,
            gap,
            gap_star,
            bound_main,
            bound_star,
            rayleigh_value: None,
            consistency_gap_vs_rayleigh: None,
            pass_main: bound_main.map(|bm| gap >= bm - slack),
            pass_star: gap_star >= bound_star - slack,
        })
    }

    pub fn passed(&self) -> bool {
        self.pass_star && self.pass_main.unwrap_or(true)
    }
}

/// Fills a [`GapReport`] from a computed spectrum.
pub fn check_gaps<T: Real>(s: &SpectralResult<T>, alpha: T, a: T, b: T) -> Result<GapReport<T>> {
    if s.m() < 2 {
        return Err(Error::Domain("gap check needs at least two eigenpairs".into()));
    }
    let (k, ls) = lambda_star(s)?;
    GapReport::from_values(alpha, a, b, s.eigenvalues[0], s.eigenvalues[1], ls, k + 1)
}

/// [`check_gaps`] plus the Rayleigh-quotient consistency check for `n = 2`.
pub fn check_gaps_with_rayleigh<T: Real>(s: &SpectralResult<T>, cfg: &QuadConfig<T>) -> Result<GapReport<T>> {
    let mut report = check_gaps(s, s.alpha, s.a, s.b)?;
    let r = rayleigh_gap(s, 2, cfg)?;
    report.rayleigh_value = Some(r.value);
    report.consistency_gap_vs_rayleigh = Some((r.value - report.gap).abs() / report.gap);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_frozen_values() {
        let (star, main) = gap_bounds(1.5_f64, -1.0, 1.0).unwrap();
        assert!((star - 0.105_785_546_915_204_3).abs() < 1e-14);
        assert!((main.unwrap() - 4.478_718_814_679_516_3e-7).abs() < 1e-19);
        let (star, main) = gap_bounds(0.5_f64, -1.0, 1.0).unwrap();
        assert!(star.is_finite() && star > 0.0);
        assert!(main.is_none());
        assert!(gap_bounds(1.5_f64, 1.0, -1.0).is_err());
    }

    #[test]
    fn report_flags() {
        let r = GapReport::from_values(0.7_f64, -1.0, 1.0, 1.0, 2.0, 2.0, 2).unwrap();
        assert_eq!(r.pass_main, None);
        assert!(r.pass_star && r.passed());
        let r = GapReport::from_values(1.5_f64, -1.0, 1.0, 1.0, 1.0 + 1e-6, 1.0 + 1e-6, 2).unwrap();
        assert_eq!(r.pass_main, Some(true));
        assert!(!r.pass_star);
    }

    #[test]
    fn interpolant_vanishes_at_endpoints() {
        let grid = Grid::new(0.0_f64, 1.0, 3).unwrap();
        let pl = ground_state_interpolant(&grid, &[1.0, 2.0, 1.0]).unwrap();
        assert_eq!(pl.eval(0.0), 0.0);
        assert_eq!(pl.eval(1.0), 0.0);
        assert!((pl.eval(0.125) - 0.5).abs() < 1e-15);
        assert!(ground_state_interpolant(&grid, &[1.0]).is_err());
    }

    #[test]
    fn constant_f_has_zero_form() {
        let grid = Grid::new(-1.0_f64, 1.0, 15).unwrap();
        let phi: Vec<f64> = grid.nodes().iter().map(|x| 1.0 - x * x).collect();
        let one = |_: f64| 1.0;
        let v = weighted_form(&one, &[], &phi, &grid, 1.5, &QuadConfig::double()).unwrap();
        assert_eq!(v.value, 0.0);
    }
}
