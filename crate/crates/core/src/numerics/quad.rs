use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Tolerances and limits for the adaptive quadrature engines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct QuadConfig<T> {
    /// Absolute tolerance on the integral value.
    pub abs_tol: T,
    pub rel_tol: T,
    /// Maximum number of panels a single adaptive run may hold.
    pub max_panels: usize,
    /// Exponent of the mesh grading toward the kernel singularity (≥ 1).
    pub grading_exponent: T,
}

impl<T: Real> QuadConfig<T> {
    /// Defaults for one-dimensional integrals.
    pub fn one_dim() -> Self {
        Self {
            abs_tol: T::lit(1e-8),
            rel_tol: T::lit(1e-8),
            max_panels: 4096,
            grading_exponent: T::lit(3.0),
        }
    }

    /// Defaults for singular double integrals.
    pub fn double() -> Self {
        Self {
            abs_tol: T::lit(1e-6),
            rel_tol: T::lit(1e-6),
            max_panels: 8192,
            grading_exponent: T::lit(3.0),
        }
    }

    pub fn with_tolerances(mut self, abs_tol: T, rel_tol: T) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > T::zero()) || !(self.rel_tol > T::zero()) {
            return Err(Error::Domain("quadrature tolerances must be positive".into()));
        }
        if self.max_panels < 4 {
            return Err(Error::Domain("max_panels must be at least 4".into()));
        }
        if !(self.grading_exponent >= T::one()) {
            return Err(Error::Domain("grading_exponent must be at least 1".into()));
        }
        Ok(())
    }

    pub(crate) fn tolerance_for(&self, value: T) -> T {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

impl<T: Real> Default for QuadConfig<T> {
    fn default() -> Self {
        Self::one_dim()
    }
}

/// An integral value together with its estimated quadrature error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FormValue<T> {
    pub value: T,
    pub error_estimate: T,
}

impl<T: Real> FormValue<T> {
    pub fn new(value: T, error_estimate: T) -> Self {
        Self {
            value,
            error_estimate: error_estimate.abs(),
        }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn scale(self, factor: T) -> Self {
        Self::new(self.value * factor, self.error_estimate * factor.abs())
    }
}

// Gauss–Kronrod 7/15 nodes and weights (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// The fifteen abscissae of the Kronrod rule mapped onto `[lo, hi]`, in
/// increasing order, together with the Kronrod and embedded Gauss weights
/// (Gauss weight zero at non-Gauss nodes).
pub(crate) fn gauss_kronrod_15<T: Real>(lo: T, hi: T) -> [(T, T, T); 15] {
    let center = T::lit(0.5) * (lo + hi);
    let half = T::lit(0.5) * (hi - lo);
    let mut out = [(T::zero(), T::zero(), T::zero()); 15];
    for j in 0..7 {
        let wg = if j % 2 == 1 { T::lit(WG[j / 2]) * half } else { T::zero() };
        let wk = T::lit(WGK[j]) * half;
        out[j] = (center - T::lit(XGK[j]) * half, wk, wg);
        out[14 - j] = (center + T::lit(XGK[j]) * half, wk, wg);
    }
    out[7] = (center, T::lit(WGK[7]) * half, T::lit(WG[3]) * half);
    out
}

/// Applies the 7/15 Gauss–Kronrod pair to `f` on `[lo, hi]`.
/// Returns `(kronrod, |kronrod − gauss|)`.
pub(crate) fn gk15<T: Real, F: Fn(T) -> T + ?Sized>(f: &F, lo: T, hi: T) -> (T, T) {
    let mut k = T::zero();
    let mut g = T::zero();
    for (x, wk, wg) in gauss_kronrod_15(lo, hi) {
        let fx = f(x);
        k = k + wk * fx;
        g = g + wg * fx;
    }
    (k, (k - g).abs())
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Panel<T> {
    pub lo: T,
    pub hi: T,
    pub value: T,
    pub error: T,
}

impl<T: Real> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: Real> Eq for Panel<T> {}
impl<T: Real> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        // max-heap on error; ties broken by position for determinism
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.lo.partial_cmp(&self.lo).unwrap_or(Ordering::Equal))
    }
}

/// Global adaptive bisection driven by a panel rule.
///
/// `rule(lo, hi)` returns `(value, error)` for a panel. Panels with the
/// largest error are bisected until the summed error meets the tolerance.
/// On exhaustion of `max_panels` the achieved value is returned as `Err`.
pub(crate) fn adaptive<T, R>(
    rule: R,
    initial: &[T],
    cfg: &QuadConfig<T>,
) -> std::result::Result<FormValue<T>, FormValue<T>>
where
    T: Real,
    R: Fn(T, T) -> (T, T),
{
    let mut heap = BinaryHeap::new();
    for w in initial.windows(2) {
        if w[1] > w[0] {
            let (value, error) = rule(w[0], w[1]);
            heap.push(Panel { lo: w[0], hi: w[1], value, error });
        }
    }
    adaptive_refine(heap, rule, FormValue::zero(), cfg)
}

/// Refines `heap` until it meets the tolerance. `fixed` is a contribution
/// that is part of the total but not refinable.
pub(crate) fn adaptive_refine<T, R>(
    mut heap: BinaryHeap<Panel<T>>,
    rule: R,
    fixed: FormValue<T>,
    cfg: &QuadConfig<T>,
) -> std::result::Result<FormValue<T>, FormValue<T>>
where
    T: Real,
    R: Fn(T, T) -> (T, T),
{
    let eps = T::epsilon();
    let finish = |heap: &BinaryHeap<Panel<T>>| {
        let (v, e) = totals(heap);
        FormValue::new(v + fixed.value, e + fixed.error_estimate)
    };
    // running sums drive the stopping test; the reported totals are
    // re-summed in positional order
    let (mut total, mut err) = totals(&heap);
    total = total + fixed.value;
    err = err + fixed.error_estimate;
    loop {
        let tol = cfg.tolerance_for(total);
        if err <= tol || err <= T::lit(50.0) * eps * total.abs() {
            let done = finish(&heap);
            if done.error_estimate <= cfg.tolerance_for(done.value)
                || done.error_estimate <= T::lit(50.0) * eps * done.value.abs()
            {
                return Ok(done);
            }
            let (t, e) = totals(&heap);
            total = t + fixed.value;
            err = e + fixed.error_estimate;
            continue;
        }
        if heap.len() >= cfg.max_panels {
            return Err(finish(&heap));
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => return Ok(fixed),
        };
        let mid = T::lit(0.5) * (worst.lo + worst.hi);
        let scale = worst.lo.abs().max(worst.hi.abs()).max(T::min_positive_value());
        if !(mid > worst.lo && mid < worst.hi) || worst.hi - worst.lo <= T::lit(4.0) * eps * scale {
            // cannot resolve further in this precision
            heap.push(worst);
            return Err(finish(&heap));
        }
        let (v1, e1) = rule(worst.lo, mid);
        let (v2, e2) = rule(mid, worst.hi);
        total = total - worst.value + v1 + v2;
        err = err - worst.error + e1 + e2;
        heap.push(Panel { lo: worst.lo, hi: mid, value: v1, error: e1 });
        heap.push(Panel { lo: mid, hi: worst.hi, value: v2, error: e2 });
    }
}

/// Sum of panel values and errors in increasing `lo` order, so the result
/// does not depend on heap layout.
pub(crate) fn totals<T: Real>(heap: &BinaryHeap<Panel<T>>) -> (T, T) {
    let mut panels: Vec<&Panel<T>> = heap.iter().collect();
    panels.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap_or(Ordering::Equal));
    let total = panels.iter().fold(T::zero(), |acc, p| acc + p.value);
    let err = panels.iter().fold(T::zero(), |acc, p| acc + p.error);
    (total, err)
}

/// Adaptive Gauss–Kronrod quadrature of `f` over `[lo, hi]`.
///
/// Integrable endpoint singularities are tolerated: the rule never samples
/// the panel endpoints.
pub fn integrate_1d<T, F>(f: F, lo: T, hi: T, cfg: &QuadConfig<T>) -> Result<FormValue<T>>
where
    T: Real,
    F: Fn(T) -> T,
{
    integrate_1d_with_breaks(f, &[lo, hi], cfg)
}

/// Like [`integrate_1d`], with the initial panel partition given by the
/// sorted list `breaks` (first and last entries are the limits).
pub fn integrate_1d_with_breaks<T, F>(f: F, breaks: &[T], cfg: &QuadConfig<T>) -> Result<FormValue<T>>
where
    T: Real,
    F: Fn(T) -> T,
{
    cfg.validate()?;
    if breaks.len() < 2 {
        return Err(Error::Domain("integration needs at least two break points".into()));
    }
    if breaks.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::Domain("break points must be nondecreasing".into()));
    }
    let rule = |a: T, b: T| gk15(&f, a, b);
    match adaptive(rule, breaks, cfg) {
        Ok(v) if v.value.is_finite() => Ok(v),
        Ok(v) | Err(v) => Err(Error::NonConvergence {
            value: v.value.to_f64_lossy(),
            error_estimate: v.error_estimate.to_f64_lossy(),
            tolerance: cfg.tolerance_for(v.value).to_f64_lossy(),
        }),
    }
}
