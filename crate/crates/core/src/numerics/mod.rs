//! Special functions, normalizing constants and quadrature engines for the
//! singular double integrals that appear in the nonlocal Dirichlet form.

pub(crate) mod constants;
mod gamma;
mod interp;
mod quad;
mod singular;

pub use constants::{gap_constant, jump_constant, levy_constant, poincare_constant, witness_ratio};
pub use gamma::gamma_fn;
pub use interp::PiecewiseLinear;
pub use quad::{integrate_1d, integrate_1d_with_breaks, FormValue, QuadConfig};
pub use singular::{singular_double_integral, singular_double_integral_with_breaks};

