use crate::error::{Error, Result};
use crate::scalar::Real;

/// Observed convergence order from three values on grids refined by a
/// factor of two each: `log₂((v₁ − v₂)/(v₂ − v₃))`.
pub fn estimate_order<T: Real>(v1: T, v2: T, v3: T) -> Result<T> {
    let q = (v1 - v2) / (v2 - v3);
    if !(q > T::zero()) || !q.is_finite() {
        return Err(Error::Domain(format!("differences are not monotone: {v1}, {v2}, {v3}")));
    }
    Ok(q.log2())
}

/// Extrapolates `fine + (fine − coarse)/(r^p − 1)` for refinement ratio `r`.
pub fn richardson<T: Real>(coarse: T, fine: T, ratio: T, order: T) -> T {
    fine + (fine - coarse) / (ratio.powf(order) - T::one())
}

/// [`richardson`] with ratio 2.
pub fn richardson_two_level<T: Real>(coarse: T, fine: T, order: T) -> T {
    richardson(coarse, fine, T::lit(2.0), order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_pure_power_error() {
        let exact = 3.0_f64;
        let v = |h: f64| exact + 0.7 * h.powf(1.5);
        let p = estimate_order(v(0.1), v(0.05), v(0.025)).unwrap();
        assert!((p - 1.5).abs() < 1e-10);
        assert!((richardson_two_level(v(0.05), v(0.025), p) - exact).abs() < 1e-12);
    }

    #[test]
    fn non_monotone_rejected() {
        assert!(estimate_order(1.0_f64, 2.0, 1.5).is_err());
    }
}
