use crate::error::{Error, Result};
use crate::scalar::Real;

/// Continuous piecewise-linear interpolant through `(xs[i], ys[i])`,
/// extended constantly outside `[xs[0], xs[n−1]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear<T> {
    xs: Vec<T>,
    ys: Vec<T>,
    // (origin, spacing) when the abscissae are uniform, for O(1) lookup
    uniform: Option<(T, T)>,
}

impl<T: Real> PiecewiseLinear<T> {
    pub fn new(xs: Vec<T>, ys: Vec<T>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::Domain("abscissae and values differ in length".into()));
        }
        if xs.len() < 2 {
            return Err(Error::Domain("piecewise-linear data needs two nodes".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("abscissae must be strictly increasing".into()));
        }
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Domain("piecewise-linear data must be finite".into()));
        }
        let n = xs.len();
        let h = (xs[n - 1] - xs[0]) / T::from_usize_lossy(n - 1);
        let tol = T::lit(1e-9) * h;
        let uniform = xs
            .iter()
            .enumerate()
            .all(|(i, &x)| (x - (xs[0] + T::from_usize_lossy(i) * h)).abs() <= tol)
            .then_some((xs[0], h));
        Ok(Self { xs, ys, uniform })
    }

    pub fn xs(&self) -> &[T] {
        &self.xs
    }

    pub fn ys(&self) -> &[T] {
        &self.ys
    }

    /// Kinks of the interpolant, i.e. all nodes.
    pub fn breakpoints(&self) -> &[T] {
        &self.xs
    }

    pub fn lo(&self) -> T {
        self.xs[0]
    }

    pub fn hi(&self) -> T {
        self.xs[self.xs.len() - 1]
    }

    /// Largest absolute slope: the exact Lipschitz constant.
    pub fn lipschitz(&self) -> T {
        self.xs
            .windows(2)
            .zip(self.ys.windows(2))
            .map(|(x, y)| ((y[1] - y[0]) / (x[1] - x[0])).abs())
            .fold(T::zero(), T::max)
    }

    fn segment(&self, x: T) -> usize {
        let n = self.xs.len();
        if let Some((x0, h)) = self.uniform {
            let guess = ((x - x0) / h).floor().to_usize().unwrap_or(0).min(n - 2);
            // correct rounding at the segment boundary
            if x < self.xs[guess] && guess > 0 {
                return guess - 1;
            }
            if guess + 2 < n && x >= self.xs[guess + 1] {
                return guess + 1;
            }
            return guess;
        }
        match self.xs.partition_point(|&xi| xi <= x) {
            0 => 0,
            k => (k - 1).min(n - 2),
        }
    }

    pub fn eval(&self, x: T) -> T {
        let n = self.xs.len();
        if !(x > self.xs[0]) {
            return self.ys[0];
        }
        if !(x < self.xs[n - 1]) {
            return self.ys[n - 1];
        }
        let i = self.segment(x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let t = (x - x0) / (x1 - x0);
        self.ys[i] + t * (self.ys[i + 1] - self.ys[i])
    }
}
