//! Globally adaptive Gauss-Kronrod (7/15) quadrature.
//!
//! Works for real and complex integrands. The interval with the largest
//! error estimate is bisected until the summed estimate meets the
//! tolerance. Callers pass known trouble spots (kernel peaks, endpoints of
//! density pieces) as breakpoints.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{NevError, Result};

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

/// Values that can be integrated: reals and complex numbers.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            max_intervals: 20_000,
        }
    }
}

impl QuadOptions {
    pub fn rel(rel_tol: f64) -> Self {
        QuadOptions {
            rel_tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<V> {
    pub value: V,
    pub error: f64,
    pub intervals: usize,
}

struct Segment<V> {
    a: f64,
    b: f64,
    value: V,
    error: f64,
}

impl<V> PartialEq for Segment<V> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<V> Eq for Segment<V> {}
impl<V> PartialOrd for Segment<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Segment<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<V: QuadValue, F: Fn(f64) -> V>(f: &F, a: f64, b: f64) -> (V, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut fv1 = [V::zero(); 7];
    let mut fv2 = [V::zero(); 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod = kronrod + (f1 + f2) * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut resasc = WGK[7] * (fc - mean).magnitude();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).magnitude() + (fv2[j] - mean).magnitude());
    }
    let value = kronrod * half;
    resasc *= half.abs();
    let diff = ((kronrod - gauss) * half).magnitude();
    let mut error = diff;
    if resasc != 0.0 && diff != 0.0 {
        error = resasc * (200.0 * diff / resasc).powf(1.5).min(1.0);
    }
    // roundoff floor
    let floor = 50.0 * f64::EPSILON * value.magnitude();
    (value, error.max(floor))
}

/// Integrate `f` over `[points[0], points[last]]`, starting from the
/// partition given by `points` (sorted; duplicates are dropped).
pub fn integrate<V, F>(f: F, points: &[f64], opts: QuadOptions) -> Result<QuadResult<V>>
where
    V: QuadValue,
    F: Fn(f64) -> V,
{
    if points.len() < 2 {
        return Err(NevError::arg("quadrature needs at least two points"));
    }
    let mut pts: Vec<f64> = points.to_vec();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    if pts.iter().any(|p| !p.is_finite()) {
        return Err(NevError::arg("quadrature bounds must be finite"));
    }
    if pts.len() < 2 {
        return Ok(QuadResult {
            value: V::zero(),
            error: 0.0,
            intervals: 0,
        });
    }
    let mut heap = BinaryHeap::new();
    let mut total = V::zero();
    let mut total_err = 0.0;
    for w in pts.windows(2) {
        let (value, error) = gk15(&f, w[0], w[1]);
        total = total + value;
        total_err += error;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }
    let mut frozen_err = 0.0;
    let mut frozen_value = V::zero();
    loop {
        let target = opts.abs_tol.max(opts.rel_tol * total.magnitude());
        if total_err + frozen_err <= target || heap.is_empty() {
            break;
        }
        if heap.len() >= opts.max_intervals {
            return Err(NevError::Numeric {
                message: format!(
                    "adaptive quadrature did not converge after {} intervals (error {:.3e})",
                    heap.len(),
                    total_err + frozen_err
                ),
                partial: total.magnitude(),
            });
        }
        let worst = heap.pop().expect("nonempty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b || (worst.b - worst.a) < 1e-300 {
            // interval can no longer be split
            total_err -= worst.error;
            frozen_err += worst.error;
            frozen_value = frozen_value + worst.value;
            continue;
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        total = total - worst.value + v1 + v2;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // re-sum to shed accumulated update roundoff
    let mut value = frozen_value;
    let mut error = frozen_err;
    let intervals = heap.len();
    for s in heap {
        value = value + s.value;
        error += s.error;
    }
    Ok(QuadResult {
        value,
        error,
        intervals,
    })
}

/// Breakpoint list for `[a, b]` with the interior `extra` points that fall
/// strictly inside the interval.
pub fn partition(a: f64, b: f64, extra: &[f64]) -> Vec<f64> {
    let mut pts = vec![a, b];
    pts.extend(extra.iter().copied().filter(|&p| p > a && p < b));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x: f64| x.powi(5) - 2.0 * x, &[0.0, 2.0], QuadOptions::default()).unwrap();
        assert!((r.value - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
    }

    #[test]
    fn narrow_lorentzian_at_breakpoint() {
        let y = 1e-12;
        let r = integrate(|x: f64| y / (x * x + y * y), &[-1.0, 0.0, 1.0], QuadOptions::default())
            .unwrap();
        let exact = 2.0 * (1.0 / y).atan();
        assert!((r.value - exact).abs() < 1e-9 * exact, "{} vs {}", r.value, exact);
    }

    #[test]
    fn complex_integrand() {
        // ∫_{-1}^{1} dt/(t - i) = iπ/2
        let z = Complex64::new(0.0, 1.0);
        let r = integrate(|t: f64| 1.0 / (Complex64::new(t, 0.0) - z), &[-1.0, 1.0], QuadOptions::default())
            .unwrap();
        assert!((r.value - Complex64::new(0.0, std::f64::consts::FRAC_PI_2)).norm() < 1e-12);
    }

    #[test]
    fn endpoint_singularity_converges() {
        let r = integrate(|x: f64| x.powf(-0.5), &[0.0, 1.0], QuadOptions::rel(1e-9)).unwrap();
        assert!((r.value - 2.0).abs() < 1e-7);
    }

    #[test]
    fn too_few_points_is_an_error() {
        assert!(integrate(|x: f64| x, &[1.0], QuadOptions::default()).is_err());
    }
}
