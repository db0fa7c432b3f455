use crate::error::{Error, Result};
use crate::numerics::gamma::gamma_fn;
use crate::scalar::Real;

/// The normalizing constant `𝒜_γ = Γ((1−γ)/2) / (2^γ √π |Γ(γ/2)|)`.
///
/// With `γ = −α` this is the density of the Lévy measure of the symmetric
/// α-stable process, `ν(dx) = 𝒜_{−α} |x|^{−1−α} dx`.
pub fn levy_constant<T: Real>(gamma: T) -> Result<T> {
    if !(gamma > T::lit(-2.0) && gamma < T::one()) || gamma == T::zero() {
        return Err(Error::Domain(format!(
            "levy constant requires gamma in (-2, 1) \\ {{0}}, got {gamma}"
        )));
    }
    let two = T::lit(2.0);
    let num = gamma_fn((T::one() - gamma) / two)?;
    let den = two.powf(gamma) * T::PI().sqrt() * gamma_fn(gamma / two)?.abs();
    Ok(num / den)
}

/// `𝒜_{−α}` for a stability index `α ∈ (0, 2)`.
pub fn jump_constant<T: Real>(alpha: T) -> Result<T> {
    check_alpha_open(alpha)?;
    levy_constant(-alpha)
}

/// Constant of the fractional Poincaré inequality, `(1/9)^{(α+1)/(α−1)}`,
/// for `α ∈ (1, 2)`.
pub fn poincare_constant<T: Real>(alpha: T) -> Result<T> {
    check_alpha_above_one(alpha)?;
    let ninth = T::one() / T::lit(9.0);
    Ok(ninth.powf((alpha + T::one()) / (alpha - T::one())))
}

/// Constant of the main gap bound, `(𝒜_{−α}/4)·(1/9)^{(α+1)/(α−1)}`.
pub fn gap_constant<T: Real>(alpha: T) -> Result<T> {
    Ok(jump_constant(alpha)? / T::lit(4.0) * poincare_constant(alpha)?)
}

/// Interval contraction ratio `c = 9^{−1/(α−1)}` of the witness recursion.
pub fn witness_ratio<T: Real>(alpha: T) -> Result<T> {
    check_alpha_above_one(alpha)?;
    Ok(T::lit(9.0).powf(-T::one() / (alpha - T::one())))
}

pub(crate) fn check_alpha_open<T: Real>(alpha: T) -> Result<()> {
    if alpha > T::zero() && alpha < T::lit(2.0) {
        Ok(())
    } else {
        Err(Error::Domain(format!("alpha must lie in (0, 2), got {alpha}")))
    }
}

pub(crate) fn check_alpha_above_one<T: Real>(alpha: T) -> Result<()> {
    if alpha > T::one() && alpha < T::lit(2.0) {
        Ok(())
    } else {
        Err(Error::Domain(format!("alpha must lie in (1, 2), got {alpha}")))
    }
}
