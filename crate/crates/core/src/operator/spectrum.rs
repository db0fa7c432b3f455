use serde::Serialize;

use super::eigen::symmetric_eigen;
use super::{Grid, OperatorMatrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const DEFAULT_PARITY_TOL: f64 = 1e-6;

/// Relative eigenvalue separation below which a cluster is treated as
/// degenerate and its parities are not classified.
const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Symmetric,
    Antisymmetric,
    Mixed,
}

impl Parity {
    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Symmetric => "symmetric",
            Parity::Antisymmetric => "antisymmetric",
            Parity::Mixed => "mixed",
        }
    }
}

/// Lowest eigenpairs of an [`OperatorMatrix`].
///
/// Eigenvectors are normalized in the discrete `L²` inner product
/// `h Σ φ_i ψ_i`; residuals are `‖Hv − λv‖₂` for the Euclidean unit vector
/// `v` parallel to `φ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct SpectralResult<T> {
    pub alpha: T,
    pub a: T,
    pub b: T,
    #[serde(rename = "N")]
    pub n: usize,
    pub eigenvalues: Vec<T>,
    pub parities: Vec<Parity>,
    pub residuals: Vec<T>,
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<T>>,
    #[serde(skip)]
    pub frobenius_norm: T,
}

impl<T: Real> SpectralResult<T> {
    pub fn grid(&self) -> Grid<T> {
        Grid::new(self.a, self.b, self.n).expect("grid of a computed spectrum")
    }

    pub fn h(&self) -> T {
        (self.b - self.a) / T::from_usize_lossy(self.n + 1)
    }

    pub fn nodes(&self) -> Vec<T> {
        self.grid().nodes()
    }

    pub fn m(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn gap(&self) -> Option<T> {
        (self.m() >= 2).then(|| self.eigenvalues[1] - self.eigenvalues[0])
    }

    pub fn ground_state(&self) -> &[T] {
        &self.eigenvectors[0]
    }
}

/// Lowest `m` eigenpairs with the default parity tolerance, widened to
/// `√ε` when the scalar type cannot resolve it.
pub fn eigensolve<T: Real>(op: &OperatorMatrix<T>, m: usize) -> Result<SpectralResult<T>> {
    eigensolve_with(op, m, T::lit(DEFAULT_PARITY_TOL).max(T::epsilon().sqrt()))
}

pub fn eigensolve_with<T: Real>(op: &OperatorMatrix<T>, m: usize, parity_tol: T) -> Result<SpectralResult<T>> {
    let n = op.size();
    if m == 0 || m > n {
        return Err(Error::Domain(format!("requested {m} eigenpairs of a {n}x{n} operator")));
    }
    // decomposing H/h^{−α} keeps the spectrum exactly covariant under
    // dilation of the interval
    let eig = symmetric_eigen(&op.reduced_entries(), n)?;
    let scale = op.grid.h.sqrt().recip();

    let mut eigenvalues = Vec::with_capacity(m);
    let mut eigenvectors = Vec::with_capacity(m);
    let mut residuals = Vec::with_capacity(m);
    for k in 0..m {
        let lambda = eig.values[k] * op.scale;
        let mut v = eig.vectors[k].clone();
        fix_sign(&mut v, k == 0);
        let hv = op.matvec(&v);
        let res = hv.iter().zip(&v).map(|(&x, &y)| (x - lambda * y).powi(2)).sum::<T>().sqrt();
        eigenvalues.push(lambda);
        residuals.push(res);
        eigenvectors.push(v.into_iter().map(|x| x * scale).collect::<Vec<T>>());
    }

    let mut parities: Vec<Parity> = eigenvectors.iter().map(|v| classify_parity(v, parity_tol)).collect();
    let deg = T::lit(DEGENERACY_TOL);
    let near = |j: usize| (eig.values[j + 1] - eig.values[j]) < deg * eig.values[j].abs();
    for (k, parity) in parities.iter_mut().enumerate() {
        let below = k > 0 && near(k - 1);
        let above = k + 1 < n && near(k);
        if below || above {
            *parity = Parity::Mixed;
        }
    }

    Ok(SpectralResult {
        alpha: op.alpha,
        a: op.grid.a,
        b: op.grid.b,
        n,
        eigenvalues,
        parities,
        residuals,
        eigenvectors,
        frobenius_norm: op.frobenius_norm(),
    })
}

/// Ground state: positive sum. Others: largest-magnitude entry positive,
/// ties resolved to the first index.
fn fix_sign<T: Real>(v: &mut [T], ground: bool) {
    let flip = if ground {
        v.iter().copied().sum::<T>() < T::zero()
    } else {
        let mut best = T::zero();
        let mut sign = T::zero();
        for &x in v.iter() {
            if x.abs() > best * (T::one() + T::lit(1e-9)) {
                best = x.abs();
                sign = x;
            }
        }
        sign < T::zero()
    };
    if flip {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

fn classify_parity<T: Real>(v: &[T], tol: T) -> Parity {
    let n = v.len();
    let sup = v.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    let limit = tol * sup;
    let mut sym = T::zero();
    let mut anti = T::zero();
    for i in 0..n {
        let j = n - 1 - i;
        sym = sym.max((v[i] - v[j]).abs());
        anti = anti.max((v[i] + v[j]).abs());
    }
    if sym <= limit {
        Parity::Symmetric
    } else if anti <= limit {
        Parity::Antisymmetric
    } else {
        Parity::Mixed
    }
}

/// First antisymmetric pair in increasing eigenvalue order, as
/// `(zero-based index, eigenvalue)`.
pub fn lambda_star<T: Real>(s: &SpectralResult<T>) -> Result<(usize, T)> {
    s.parities
        .iter()
        .position(|&p| p == Parity::Antisymmetric)
        .map(|k| (k, s.eigenvalues[k]))
        .ok_or(Error::NotFound { computed: s.m() })
}

/// `(e^{−Ht} 1)_c`: the discrete survival probability at node `c`
/// (zero-based), from the full eigendecomposition.
pub fn survival_oracle<T: Real>(op: &OperatorMatrix<T>, t: T, node: usize) -> Result<T> {
    let n = op.size();
    if node >= n {
        return Err(Error::Domain(format!("node {node} outside a grid of {n}")));
    }
    let eig = symmetric_eigen(&op.entries, n)?;
    Ok(eig
        .values
        .iter()
        .zip(&eig.vectors)
        .map(|(&l, v)| (-l * t).exp() * v[node] * v.iter().copied().sum::<T>())
        .sum())
}
