//! Fractional centered-difference discretization of `(−Δ)^{α/2} + V` on a
//! bounded interval with zero exterior extension, and its low spectrum.

mod checks;
mod eigen;
mod richardson;
mod spectrum;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::gamma_fn;
use crate::potentials::Potential;
use crate::scalar::Real;

pub use checks::{boundary_decay_check, ground_state_shape_check, shape_check_vector, DecayReport, ShapeReport};
pub use eigen::{symmetric_eigen, SymmetricEigen};
pub use richardson::{estimate_order, richardson, richardson_two_level};
pub use spectrum::{eigensolve, eigensolve_with, lambda_star, survival_oracle, Parity, SpectralResult, DEFAULT_PARITY_TOL};

/// Uniform interior grid `x_i = a + i h`, `i = 1..=n`, `h = (b − a)/(n + 1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct Grid<T> {
    pub a: T,
    pub b: T,
    pub n: usize,
    pub h: T,
}

impl<T: Real> Grid<T> {
    pub fn new(a: T, b: T, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::Domain(format!("invalid interval ({a}, {b})")));
        }
        if n == 0 {
            return Err(Error::Domain("grid needs at least one interior node".into()));
        }
        let h = (b - a) / T::from_usize_lossy(n + 1);
        Ok(Self { a, b, n, h })
    }

    /// Node `i` in `1..=n`.
    pub fn node(&self, i: usize) -> T {
        self.a + T::from_usize_lossy(i) * self.h
    }

    pub fn nodes(&self) -> Vec<T> {
        (1..=self.n).map(|i| self.node(i)).collect()
    }

    pub fn length(&self) -> T {
        self.b - self.a
    }

    pub fn midpoint(&self) -> T {
        T::lit(0.5) * (self.a + self.b)
    }
}

/// Centered-difference weights `g_0..=g_K` of the fractional Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub struct FracCoeffs<T> {
    pub alpha: T,
    pub g: Vec<T>,
}

impl<T: Real> FracCoeffs<T> {
    pub fn k(&self) -> usize {
        self.g.len() - 1
    }

    /// `g_0 + 2 Σ_{k=1..K} g_k`.
    pub fn symmetric_sum(&self) -> T {
        self.g[0] + T::lit(2.0) * self.g[1..].iter().copied().sum::<T>()
    }
}

/// `g_0 = Γ(α+1)/Γ(α/2+1)²`, `g_{k+1} = g_k (k − α/2)/(k + 1 + α/2)`.
pub fn frac_coeffs<T: Real>(alpha: T, k: usize) -> Result<FracCoeffs<T>> {
    if !(alpha > T::zero() && alpha <= T::lit(2.0)) {
        return Err(Error::Domain(format!("alpha must lie in (0, 2], got {alpha}")));
    }
    if k == 0 {
        return Err(Error::Domain("stencil cutoff must be at least 1".into()));
    }
    let half = T::lit(0.5) * alpha;
    let g1 = gamma_fn(half + T::one())?;
    let mut g = Vec::with_capacity(k + 1);
    g.push(gamma_fn(alpha + T::one())? / (g1 * g1));
    for j in 0..k {
        let jj = T::from_usize_lossy(j);
        let next = g[j] * (jj - half) / (jj + T::one() + half);
        g.push(next);
    }
    Ok(FracCoeffs { alpha, g })
}

/// Dense symmetric operator matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix<T> {
    pub grid: Grid<T>,
    pub alpha: T,
    pub potential_id: String,
    pub entries: Vec<T>,
    pub potential_values: Vec<T>,
    /// `h^{−α}`.
    pub scale: T,
    /// Unscaled weights `g_0..g_{N−1}`.
    pub stencil: Vec<T>,
}

impl<T: Real> OperatorMatrix<T> {
    pub fn size(&self) -> usize {
        self.grid.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[i * self.grid.n + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        let n = self.grid.n;
        &self.entries[i * n..(i + 1) * n]
    }

    pub fn frobenius_norm(&self) -> T {
        self.entries.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    /// `H / h^{−α}`, assembled from the unscaled weights so that it does not
    /// depend on the interval length when `V ≡ 0`.
    pub fn reduced_entries(&self) -> Vec<T> {
        let n = self.grid.n;
        let mut out = vec![T::zero(); n * n];
        for (i, row) in out.chunks_mut(n).enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = self.stencil[i.abs_diff(j)];
            }
            row[i] = row[i] + self.potential_values[i] / self.scale;
        }
        out
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        (0..self.grid.n)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }
}

/// `H_ij = h^{−α} g_{|i−j|} + δ_ij V(x_i)` with the stencil truncated at the
/// boundary, which realizes the zero exterior extension.
pub fn assemble_operator<T: Real>(grid: &Grid<T>, alpha: T, v: &Potential<T>) -> Result<OperatorMatrix<T>> {
    if !(alpha > T::zero() && alpha <= T::lit(2.0)) {
        return Err(Error::Domain(format!("alpha must lie in (0, 2], got {alpha}")));
    }
    let n = grid.n;
    let coeffs = frac_coeffs(alpha, n.max(1))?;
    let scale = grid.h.powf(-alpha);
    let stencil = coeffs.g;
    let potential_values: Vec<T> = (1..=n).map(|i| v.eval(grid.node(i))).collect();
    if let Some(i) = potential_values.iter().position(|y| !y.is_finite()) {
        return Err(Error::SingularPotential { x: grid.node(i + 1).to_f64_lossy() });
    }
    let mut entries = vec![T::zero(); n * n];
    entries.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for (j, e) in row.iter_mut().enumerate() {
            *e = scale * stencil[i.abs_diff(j)];
        }
        row[i] = row[i] + potential_values[i];
    });
    Ok(OperatorMatrix {
        grid: grid.clone(),
        alpha,
        potential_id: v.id(),
        entries,
        potential_values,
        scale,
        stencil,
    })
}
