//! Numerical laboratory for the one-dimensional fractional Schrödinger
//! operator `(−Δ)^{α/2} + V` on a bounded interval with Dirichlet exterior
//! conditions and symmetric single-well potentials.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod cli;
pub mod error;
pub mod forms;
pub mod numerics;
pub mod operator;
pub mod poincare;
pub mod potentials;
pub mod scalar;
pub mod stable_mc;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Grid64 = operator::Grid<f64>;
pub type Potential64 = potentials::Potential<f64>;
pub type OperatorMatrix64 = operator::OperatorMatrix<f64>;
pub type SpectralResult64 = operator::SpectralResult<f64>;
pub type QuadConfig64 = numerics::QuadConfig<f64>;
pub type FormValue64 = numerics::FormValue<f64>;
pub type GapReport64 = forms::GapReport<f64>;
pub type WitnessCertificate64 = poincare::WitnessCertificate<f64>;
pub type PathConfig64 = stable_mc::PathConfig<f64>;

pub type Grid32 = operator::Grid<f32>;
pub type Potential32 = potentials::Potential<f32>;
pub type SpectralResult32 = operator::SpectralResult<f32>;
pub type QuadConfig32 = numerics::QuadConfig<f32>;
