use serde::Serialize;

use super::spectrum::SpectralResult;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Symmetry and unimodality of a nodal vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct ShapeReport<T> {
    pub passed: bool,
    pub max_symmetry_violation: T,
    pub max_monotonicity_violation: T,
    /// Zero-based node of the worst violation, if any.
    pub worst_index: Option<usize>,
}

pub fn ground_state_shape_check<T: Real>(s: &SpectralResult<T>, tol: T) -> ShapeReport<T> {
    shape_check_vector(s.ground_state(), tol)
}

/// Checks `v_i = v_{n−1−i}` and that `v` rises up to the middle node and
/// falls after it, both within `tol · ‖v‖_∞`. Violations are reported
/// relative to `‖v‖_∞`.
pub fn shape_check_vector<T: Real>(v: &[T], tol: T) -> ShapeReport<T> {
    let n = v.len();
    let sup = v.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    let norm = if sup > T::zero() { sup } else { T::one() };
    let mut worst = T::zero();
    let mut worst_index = None;

    let mut sym = T::zero();
    for i in 0..n / 2 {
        let d = (v[i] - v[n - 1 - i]).abs() / norm;
        sym = sym.max(d);
        if d > tol && d >= worst {
            worst = d;
            worst_index = Some(i);
        }
    }

    // midpoint in index units is (n − 1)/2; compare with doubled indices
    let twice_mid = n - 1;
    let mut mono = T::zero();
    for i in 0..n.saturating_sub(1) {
        let drop = if 2 * (i + 1) <= twice_mid {
            (v[i] - v[i + 1]) / norm
        } else if 2 * i >= twice_mid {
            (v[i + 1] - v[i]) / norm
        } else {
            T::zero()
        };
        if drop > mono {
            mono = drop;
        }
        if drop > tol && drop >= worst {
            worst = drop;
            worst_index = Some(if 2 * (i + 1) <= twice_mid { i + 1 } else { i });
        }
    }

    ShapeReport {
        passed: sym <= tol && mono <= tol,
        max_symmetry_violation: sym,
        max_monotonicity_violation: mono,
        worst_index,
    }
}

/// Least-squares slope of `log φ_1` against `log δ(x)` near each endpoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct DecayReport<T> {
    pub passed: bool,
    pub slope_left: T,
    pub slope_right: T,
    pub slope: T,
    pub expected: T,
    pub nodes_per_side: usize,
}

pub fn boundary_decay_check<T: Real>(s: &SpectralResult<T>, alpha: T) -> Result<DecayReport<T>> {
    if s.n < 128 {
        return Err(Error::Precondition(format!("boundary decay fit needs N >= 128, got {}", s.n)));
    }
    let phi = s.ground_state();
    let xs = s.nodes();
    let k = s.n.div_ceil(10);
    let left: Vec<(T, T)> = (0..k).map(|i| ((xs[i] - s.a).ln(), phi[i].ln())).collect();
    let right: Vec<(T, T)> = (0..k).map(|i| {
        let j = s.n - 1 - i;
        ((s.b - xs[j]).ln(), phi[j].ln())
    }).collect();
    let slope_left = ls_slope(&left);
    let slope_right = ls_slope(&right);
    let slope = T::lit(0.5) * (slope_left + slope_right);
    let expected = T::lit(0.5) * alpha;
    Ok(DecayReport {
        passed: slope.is_finite() && slope >= expected - T::lit(0.1),
        slope_left,
        slope_right,
        slope,
        expected,
        nodes_per_side: k,
    })
}

fn ls_slope<T: Real>(pts: &[(T, T)]) -> T {
    let n = T::from_usize_lossy(pts.len());
    let mx = pts.iter().map(|p| p.0).sum::<T>() / n;
    let my = pts.iter().map(|p| p.1).sum::<T>() / n;
    let sxy = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<T>();
    let sxx = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<T>();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spike_is_located() {
        let n = 21;
        let mut v: Vec<f64> = (0..n).map(|i| {
            let x = (i as f64 + 1.0) / (n as f64 + 1.0);
            (std::f64::consts::PI * x).sin()
        }).collect();
        assert!(shape_check_vector(&v, 1e-6).passed);
        v[4] += 0.3;
        let r = shape_check_vector(&v, 1e-6);
        assert!(!r.passed);
        assert!(r.max_symmetry_violation > 0.2);
        assert_eq!(r.worst_index, Some(4));
    }

    #[test]
    fn even_length_plateau() {
        let v = [1.0, 2.0, 3.0, 3.0, 2.0, 1.0];
        assert!(shape_check_vector(&v, 0.0).passed);
        let w = [1.0, 2.0, 1.5, 1.5, 2.0, 1.0];
        assert!(!shape_check_vector(&w, 1e-6).passed);
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = (1..20).map(|i| {
            let x = i as f64 * 0.01;
            (x.ln(), 0.75 * x.ln() + 2.0)
        }).collect();
        assert!((ls_slope(&pts) - 0.75).abs() < 1e-12);
    }
}
