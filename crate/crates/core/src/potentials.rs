//! Symmetric single-well potentials on a bounded interval.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::PiecewiseLinear;
use crate::scalar::Real;

/// Distance from an endpoint below which the boundary-singular family is
/// evaluated at the clamped distance.
const ENDPOINT_CLAMP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind<T> {
    Zero,
    /// `κ |x − m|^p`, `m` the midpoint.
    PowerWell { kappa: T, p: T },
    /// `(1 − s(x)²)^{−β}`, `s` the affine map of the interval onto `[−1, 1]`.
    InverseBoundaryWell { beta: T, alpha: T },
    /// Piecewise-linear interpolation of tabulated values.
    Tabulated(PiecewiseLinear<T>),
}

/// A potential on `(a, b)`: a shape plus an additive offset.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential<T> {
    pub kind: PotentialKind<T>,
    pub a: T,
    pub b: T,
    pub offset: T,
}

fn check_interval<T: Real>(a: T, b: T) -> Result<()> {
    if a.is_finite() && b.is_finite() && a < b {
        Ok(())
    } else {
        Err(Error::Domain(format!("invalid interval ({a}, {b})")))
    }
}

impl<T: Real> Potential<T> {
    pub fn zero(a: T, b: T) -> Result<Self> {
        check_interval(a, b)?;
        Ok(Self { kind: PotentialKind::Zero, a, b, offset: T::zero() })
    }

    pub fn constant(a: T, b: T, c: T) -> Result<Self> {
        Ok(Self::zero(a, b)?.with_offset(c))
    }

    /// `κ|x − (a+b)/2|^p + offset`, `κ ≥ 0`, `p ≥ 1`.
    pub fn power_well(kappa: T, p: T, a: T, b: T, offset: T) -> Result<Self> {
        check_interval(a, b)?;
        if !(kappa >= T::zero()) || !kappa.is_finite() {
            return Err(Error::Domain(format!("power well strength must be >= 0, got {kappa}")));
        }
        if !(p >= T::one()) || !p.is_finite() {
            return Err(Error::Domain(format!("power well exponent must be >= 1, got {p}")));
        }
        if !offset.is_finite() {
            return Err(Error::Domain("offset must be finite".into()));
        }
        Ok(Self { kind: PotentialKind::PowerWell { kappa, p }, a, b, offset })
    }

    /// `(1 − s²)^{−β}`; admissible for the α-stable Kato class only when
    /// `0 < β < min(α, 1)`.
    pub fn inverse_boundary_well(beta: T, alpha: T, a: T, b: T) -> Result<Self> {
        check_interval(a, b)?;
        if !(alpha > T::zero() && alpha < T::lit(2.0)) {
            return Err(Error::Domain(format!("alpha must lie in (0, 2), got {alpha}")));
        }
        let cap = alpha.min(T::one());
        if !(beta > T::zero()) || !(beta < cap) {
            return Err(Error::ClassMembership(format!(
                "inverse boundary well needs 0 < beta < min(alpha, 1) = {cap}, got beta = {beta}"
            )));
        }
        Ok(Self { kind: PotentialKind::InverseBoundaryWell { beta, alpha }, a, b, offset: T::zero() })
    }

    /// Tabulated potential. Nodes must cover `[a, b]`'s interior evaluation
    /// points; values outside the table are held constant.
    pub fn tabulated(table: PiecewiseLinear<T>, a: T, b: T) -> Result<Self> {
        check_interval(a, b)?;
        Ok(Self { kind: PotentialKind::Tabulated(table), a, b, offset: T::zero() })
    }

    /// Loads a two-column `x, V(x)` CSV with strictly increasing `x`; a
    /// header row is skipped when its first field is not numeric.
    pub fn from_csv(path: &Path, a: T, b: T) -> Result<Self> {
        let table = read_table_csv(path)?;
        Self::tabulated(table, a, b)
    }

    pub fn with_offset(mut self, c: T) -> Self {
        self.offset = self.offset + c;
        self
    }

    pub fn midpoint(&self) -> T {
        T::lit(0.5) * (self.a + self.b)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, PotentialKind::Zero) && self.offset == T::zero()
    }

    pub fn eval(&self, x: T) -> T {
        let shape = match &self.kind {
            PotentialKind::Zero => T::zero(),
            PotentialKind::PowerWell { kappa, p } => {
                if *kappa == T::zero() {
                    T::zero()
                } else {
                    *kappa * (x - self.midpoint()).abs().powf(*p)
                }
            }
            PotentialKind::InverseBoundaryWell { beta, .. } => {
                let clamp = T::lit(ENDPOINT_CLAMP);
                let x = x.max(self.a + clamp).min(self.b - clamp);
                let half = T::lit(0.5) * (self.b - self.a);
                // 1 − s² = (1 − s)(1 + s), evaluated without cancellation
                let gap = ((self.b - x) / half) * ((x - self.a) / half);
                gap.powf(-*beta)
            }
            PotentialKind::Tabulated(table) => table.eval(x),
        };
        shape + self.offset
    }

    /// Lower bound of the potential on the interval.
    pub fn infimum(&self) -> T {
        match &self.kind {
            PotentialKind::Tabulated(table) => {
                table.ys().iter().copied().fold(T::infinity(), T::min) + self.offset
            }
            PotentialKind::InverseBoundaryWell { .. } => T::one() + self.offset,
            _ => self.offset,
        }
    }

    /// Short human-readable identifier, stable across runs.
    pub fn id(&self) -> String {
        let base = match &self.kind {
            PotentialKind::Zero => "zero".to_string(),
            PotentialKind::PowerWell { kappa, p } => format!("power_well(kappa={kappa},p={p})"),
            PotentialKind::InverseBoundaryWell { beta, .. } => format!("inverse_boundary_well(beta={beta})"),
            PotentialKind::Tabulated(t) => format!("tabulated({} nodes)", t.xs().len()),
        };
        if self.offset == T::zero() {
            base
        } else {
            format!("{base}+{}", self.offset)
        }
    }
}

fn read_table_csv<T: Real>(path: &Path) -> Result<PiecewiseLinear<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_path(path)?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != 2 {
            return Err(Error::Parse(format!("row {}: expected two columns", row + 1)));
        }
        let parse = |s: &str| s.parse::<f64>().ok();
        match (parse(&record[0]), parse(&record[1])) {
            (Some(x), Some(y)) => {
                xs.push(T::lit(x));
                ys.push(T::lit(y));
            }
            _ if row == 0 => continue,
            _ => return Err(Error::Parse(format!("row {}: non-numeric field", row + 1))),
        }
    }
    PiecewiseLinear::new(xs, ys)
}

/// Outcome of [`validate_single_well`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct SingleWellReport<T> {
    pub passed: bool,
    pub symmetric: bool,
    pub monotone: bool,
    pub finite: bool,
    pub max_asymmetry: T,
    /// First offending pair `(x_i, V(x_i), x_j, V(x_j))`.
    pub first_violation: Option<(T, T, T, T)>,
}

/// Checks symmetry about the midpoint and one-sided monotonicity on
/// `n_check` interior points `x_i = a + i(b−a)/(n_check+1)`.
pub fn validate_single_well<T: Real>(v: &Potential<T>, n_check: usize) -> Result<SingleWellReport<T>> {
    if n_check < 3 {
        return Err(Error::Domain("n_check must be at least 3".into()));
    }
    let step = (v.b - v.a) / T::from_usize_lossy(n_check + 1);
    let xs: Vec<T> = (1..=n_check).map(|i| v.a + T::from_usize_lossy(i) * step).collect();
    let vals: Vec<T> = xs.iter().map(|&x| v.eval(x)).collect();
    let finite = vals.iter().all(|y| y.is_finite());
    let tol = |y: T, z: T| T::lit(1e-12) * T::one().max(y.abs()).max(z.abs());

    let mut first_violation = None;
    let mut max_asymmetry = T::zero();
    let mut symmetric = true;
    for i in 0..n_check / 2 {
        let j = n_check - 1 - i;
        // mirror of x_i is x_j by construction of the symmetric grid
        let d = (vals[i] - vals[j]).abs();
        max_asymmetry = max_asymmetry.max(d);
        if !(d <= tol(vals[i], vals[j])) {
            symmetric = false;
            first_violation.get_or_insert((xs[i], vals[i], xs[j], vals[j]));
        }
    }

    let mid = v.midpoint();
    let mut monotone = true;
    for i in 0..n_check - 1 {
        let (x0, x1) = (xs[i], xs[i + 1]);
        let (y0, y1) = (vals[i], vals[i + 1]);
        let slack = tol(y0, y1);
        let bad = if x1 <= mid {
            y1 > y0 + slack
        } else if x0 >= mid {
            y1 + slack < y0
        } else {
            false
        };
        if bad || !(y0.is_finite() && y1.is_finite()) {
            monotone = false;
            first_violation.get_or_insert((x0, y0, x1, y1));
        }
    }
    // across the midpoint: both neighbours must sit above the centre value
    if n_check % 2 == 1 {
        let c = n_check / 2;
        let vc = v.eval(mid);
        for k in [c - 1, c + 1] {
            if vals[k] + tol(vals[k], vc) < vc {
                monotone = false;
                first_violation.get_or_insert((xs[k], vals[k], mid, vc));
            }
        }
    }

    Ok(SingleWellReport {
        passed: symmetric && monotone && finite,
        symmetric,
        monotone,
        finite,
        max_asymmetry,
        first_violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_well_values() {
        let v = Potential::<f64>::power_well(1.0, 2.0, -1.0, 1.0, 0.0).unwrap();
        assert_eq!(v.eval(0.0), 0.0);
        assert!((v.eval(0.5) - 0.25).abs() < 1e-15);
        assert!((v.eval(-0.5) - 0.25).abs() < 1e-15);
        let z = Potential::power_well(0.0, 3.0, -1.0, 1.0, 2.5).unwrap();
        assert_eq!(z.eval(0.3), 2.5);
        let neg = Potential::power_well(1.0, 2.0, -1.0, 1.0, -3.0).unwrap();
        assert_eq!(neg.infimum(), -3.0);
        assert_eq!(neg.eval(0.0), -3.0);
    }

    #[test]
    fn power_well_domain() {
        assert!(Potential::power_well(-1.0, 2.0, -1.0, 1.0, 0.0).is_err());
        assert!(Potential::power_well(1.0, 0.5, -1.0, 1.0, 0.0).is_err());
        assert!(Potential::power_well(1.0, 2.0, 1.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn inverse_boundary_well_admissibility() {
        let v = Potential::<f64>::inverse_boundary_well(0.5, 1.5, -1.0, 1.0).unwrap();
        assert!((v.eval(0.0) - 1.0).abs() < 1e-15);
        let expected = (1.0_f64 - 0.64).powf(-0.5);
        assert!((v.eval(0.8) - expected).abs() < 1e-12);
        assert!((v.eval(-0.8) - expected).abs() < 1e-12);
        assert!((expected - 1.666_666_666_666_666_7).abs() < 1e-12);
        let rejected = Potential::inverse_boundary_well(0.7, 0.5, -1.0, 1.0);
        assert!(matches!(rejected, Err(Error::ClassMembership(_))));
        assert!(Potential::inverse_boundary_well(1.0, 1.5, -1.0, 1.0).is_err());
    }

    #[test]
    fn inverse_boundary_well_clamped_at_endpoint() {
        let v = Potential::<f64>::inverse_boundary_well(0.5, 1.5, 0.0, 2.0).unwrap();
        let at_end = v.eval(2.0);
        assert!(at_end.is_finite());
        assert_eq!(at_end, v.eval(2.0 - 1e-9));
    }

    #[test]
    fn validation_passes_on_wells() {
        let zero = Potential::<f64>::zero(0.0, 1.0).unwrap();
        assert!(validate_single_well(&zero, 11).unwrap().passed);
        let pw = Potential::power_well(2.0, 1.5, -1.0, 3.0, 0.0).unwrap();
        for n in [3, 4, 17, 100] {
            assert!(validate_single_well(&pw, n).unwrap().passed);
        }
        let ib = Potential::inverse_boundary_well(0.3, 0.8, -1.0, 1.0).unwrap();
        assert!(validate_single_well(&ib, 51).unwrap().passed);
    }

    #[test]
    fn validation_reports_wedge() {
        // wedge pointing up at the midpoint
        let table = PiecewiseLinear::new(vec![0.0, 0.5, 1.0], vec![0.0, 1.0, 0.0]).unwrap();
        let v = Potential::tabulated(table, 0.0, 1.0).unwrap();
        let r = validate_single_well(&v, 9).unwrap();
        assert!(!r.passed);
        assert!(r.symmetric);
        assert!(!r.monotone);
        let (x0, y0, x1, y1) = r.first_violation.unwrap();
        assert!(x0 < x1 && y1 > y0);
    }

    #[test]
    fn validation_reports_asymmetry() {
        let table = PiecewiseLinear::new(vec![0.0, 0.5, 1.0], vec![2.0, 0.0, 1.0]).unwrap();
        let v = Potential::tabulated(table, 0.0, 1.0).unwrap();
        let r = validate_single_well(&v, 9).unwrap();
        assert!(!r.symmetric && !r.passed);
        assert!(r.first_violation.is_some());
    }

    #[test]
    fn csv_round_trip_with_and_without_header() {
        let dir = tempfile::tempdir().unwrap();
        let with = dir.path().join("with.csv");
        std::fs::write(&with, "x,V\n0,1\n0.5,0\n1,1\n").unwrap();
        let without = dir.path().join("without.csv");
        std::fs::write(&without, "0,1\n0.5,0\n1,1\n").unwrap();
        let v1 = Potential::<f64>::from_csv(&with, 0.0, 1.0).unwrap();
        let v2 = Potential::<f64>::from_csv(&without, 0.0, 1.0).unwrap();
        assert_eq!(v1, v2);
        assert!((v1.eval(0.25) - 0.5).abs() < 1e-15);
        let bad = dir.path().join("bad.csv");
        std::fs::write(&bad, "0,1\n0.5,0\n0.4,1\n").unwrap();
        assert!(Potential::<f64>::from_csv(&bad, 0.0, 1.0).is_err());
    }

    proptest::proptest! {
        #[test]
        fn offset_never_changes_validation(kappa in 0.0..50.0f64, p in 1.0..3.0f64, c in -100.0..100.0f64, n in 3usize..64) {
            let v = Potential::power_well(kappa, p, -1.0, 2.0, 0.0).unwrap();
            let r0 = validate_single_well(&v, n).unwrap();
            let r1 = validate_single_well(&v.clone().with_offset(c), n).unwrap();
            proptest::prop_assert!(r0.passed);
            proptest::prop_assert_eq!(r0.passed, r1.passed);
        }
    }
}
