//! Julia-Fatou quotients and their horizontal averages.
//!
//! The averaged quotient at scale ε is
//! `A(ε) = (1/2ε) ∫_{−ε}^{ε} Im f(τ + x + iλ(ε)) dx / 𝔨(λ(ε))`.
//! It is computed two ways: by quadrature of `Im f` along the segment
//! (any form of `f`), and by integrating the arctan window kernel against
//! the representing measure (triples only).

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Estimate, NevError, Result};
use crate::gauges::{asymptotic_class, fit_slope, Gauge};
use crate::measures::{integrate_component, ArctanWindowKernel, Component, Measure};
use crate::pick::PickFunction;
use crate::quad::{integrate, partition, QuadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Direct,
    Kernel,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientSeries {
    pub tau: f64,
    pub k: Gauge,
    pub lambda: Gauge,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub method: Method,
}

/// `2^{-from}, 2^{-from-1}, …, 2^{-to}`.
pub fn dyadic_grid(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|k| 2f64.powi(-k)).collect()
}

/// The default sweep: `2^{-3}` down to `2^{-20}`.
pub fn default_grid() -> Vec<f64> {
    dyadic_grid(3, 20)
}

/// `Im f(z) / 𝔨(Im z)`.
pub fn julia_fatou(f: &PickFunction, k: &Gauge, z: Complex64) -> Result<f64> {
    if !(z.im > 0.0) {
        return Err(NevError::Domain(format!("quotient needs Im z > 0, got {z}")));
    }
    let kv = k.eval(z.im);
    if !(kv > 0.0) {
        return Err(NevError::Domain(format!("𝔨({}) = {kv} is not positive", z.im)));
    }
    Ok(f.imag_part(z)? / kv)
}

fn height_and_scale(k: &Gauge, lambda: &Gauge, eps: f64) -> Result<(f64, f64)> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(NevError::arg(format!("ε must lie in (0, 1), got {eps}")));
    }
    let h = lambda.eval(eps);
    if !(h > 0.0 && h.is_finite()) {
        return Err(NevError::arg(format!("λ({eps}) = {h} is not positive")));
    }
    let kv = k.eval(h);
    if !(kv > 0.0 && kv.is_finite()) {
        return Err(NevError::Domain(format!("𝔨(λ({eps})) = {kv} is not positive")));
    }
    Ok((h, kv))
}

/// Average of `Im f` along the segment, by adaptive quadrature.
pub fn averaged_quotient_direct(f: &PickFunction, k: &Gauge, lambda: &Gauge, tau: f64, eps: f64) -> Result<f64> {
    let (h, kv) = height_and_scale(k, lambda, eps)?;
    let (lo, hi) = (tau - eps, tau + eps);
    let mut hints = f.boundary_hints(lo, hi, 4.0 * h);
    hints.push(tau);
    let failure = std::cell::Cell::new(None);
    let r = integrate(
        |x: f64| match f.imag_part(Complex64::new(x, h)) {
            Ok(v) => v,
            Err(e) => {
                failure.set(Some(e));
                0.0
            }
        },
        &partition(lo, hi, &hints),
        QuadOptions { rel_tol: 1e-10, abs_tol: 1e-300, max_intervals: 200_000 },
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(r.value / (2.0 * eps * kv))
}

/// `∫ (arctan((τ+ε−t)/λ) − arctan((τ−ε−t)/λ)) dμ(t)` over all of ℝ.
fn window_kernel_integral(mu: &Measure, tau: f64, eps: f64, h: f64) -> Result<f64> {
    let kernel = ArctanWindowKernel { a: tau - eps, b: tau + eps, height: h };
    let mut total = 0.0;
    for c in mu.components() {
        total += match c {
            // ∫_ℝ kernel dt = π·2ε
            Component::LebesgueLine { density } => density * PI * 2.0 * eps,
            other => integrate_component(other, &kernel, None)?,
        };
    }
    Ok(total)
}

/// Average of `Im f` along the segment, by Fubini against the measure.
pub fn averaged_quotient_kernel(f: &PickFunction, k: &Gauge, lambda: &Gauge, tau: f64, eps: f64) -> Result<f64> {
    let (_, b, mu) = f.as_triple().ok_or_else(|| {
        NevError::Unsupported("kernel method needs an explicit (a, b, μ); use the direct method".into())
    })?;
    let (h, kv) = height_and_scale(k, lambda, eps)?;
    let total = 2.0 * eps * b * h + window_kernel_integral(&mu, tau, eps, h)?;
    Ok(total / (2.0 * eps * kv))
}

pub fn averaged_quotient(
    f: &PickFunction,
    k: &Gauge,
    lambda: &Gauge,
    tau: f64,
    eps: f64,
    method: Method,
) -> Result<f64> {
    match method {
        Method::Direct => averaged_quotient_direct(f, k, lambda, tau, eps),
        Method::Kernel => averaged_quotient_kernel(f, k, lambda, tau, eps),
    }
}

/// Evaluate the averaged quotient on a strictly decreasing grid, in parallel.
pub fn quotient_series(
    f: &PickFunction,
    k: &Gauge,
    lambda: &Gauge,
    tau: f64,
    grid: &[f64],
    method: Method,
) -> Result<QuotientSeries> {
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] < w[0])) || grid.iter().any(|&e| !(e > 0.0)) {
        return Err(NevError::arg("ε grid must be positive and strictly decreasing"));
    }
    let values = grid
        .par_iter()
        .map(|&eps| averaged_quotient(f, k, lambda, tau, eps, method))
        .collect::<Result<Vec<f64>>>()?;
    Ok(QuotientSeries {
        tau,
        k: k.clone(),
        lambda: lambda.clone(),
        grid: grid.to_vec(),
        values,
        method,
    })
}

/// Constants of the two-sided augur estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AugurConstants {
    pub l0: f64,
    pub l1: f64,
    pub l2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AugurBounds {
    pub eps: f64,
    pub lower: f64,
    pub upper_density: f64,
    pub upper_tail: f64,
    pub constants: AugurConstants,
}

impl AugurBounds {
    pub fn upper(&self) -> f64 {
        self.upper_density + self.upper_tail
    }
}

fn require_big_o_t(lambda: &Gauge) -> Result<()> {
    let class = asymptotic_class(lambda, &Gauge::identity()).class;
    if !class.is_big_o() {
        return Err(NevError::precondition(format!(
            "augur estimate needs λ = O(t); λ = {lambda} is {class:?} relative to t"
        )));
    }
    Ok(())
}

/// Constants valid for all `ε ≤ eps0` when `λ(ε)/ε` does not grow as ε
/// shrinks:
/// - `L₀ = ½·arctan(2ε₀/λ(ε₀))`, the smallest kernel value inside the window;
/// - `L₁ = π`, the kernel maximum;
/// - `L₂ = (1 + 4ε₀²)·W + b·ε₀²` with `W = ∫ dμ/(1 + (t − τ)²)`.
pub fn fit_augur_constants(mu: &Measure, b: f64, lambda: &Gauge, tau: f64, eps0: f64) -> Result<AugurConstants> {
    require_big_o_t(lambda)?;
    let h0 = lambda.eval(eps0);
    if !(h0 > 0.0) {
        return Err(NevError::arg(format!("λ({eps0}) must be positive")));
    }
    let w = mu.tail_weight(tau)?;
    Ok(AugurConstants {
        l0: 0.5 * (2.0 * eps0 / h0).atan(),
        l1: PI,
        l2: (1.0 + 4.0 * eps0 * eps0) * w + b * eps0 * eps0,
    })
}

pub fn augur_bounds(
    mu: &Measure,
    b: f64,
    k: &Gauge,
    lambda: &Gauge,
    tau: f64,
    eps: f64,
    constants: AugurConstants,
) -> Result<AugurBounds> {
    require_big_o_t(lambda)?;
    if !(b >= 0.0) {
        return Err(NevError::arg("b must be nonnegative"));
    }
    let (h, kv) = height_and_scale(k, lambda, eps)?;
    let near = mu.window_mass(tau, eps)?;
    let wide = mu.window_mass(tau, 2.0 * eps)?;
    let scale = kv * eps;
    Ok(AugurBounds {
        eps,
        lower: constants.l0 * near / scale,
        upper_density: constants.l1 * wide / scale,
        upper_tail: constants.l2 * h / (kv * eps * eps),
        constants,
    })
}

/// Surrogate for the upper limit of a series as ε → 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CcLim {
    pub limsup: Estimate,
    pub bounded: bool,
    /// Least-squares slope of log(value) against log(ε) over the tail.
    pub slope: f64,
    pub heuristic: bool,
}

/// Tail half of the grid decides: bounded iff the values there are finite
/// and do not grow faster than `ε^{-0.05}`.
pub fn cc_lim_estimate(grid: &[f64], values: &[f64]) -> Result<CcLim> {
    if grid.len() != values.len() {
        return Err(NevError::arg("grid and values differ in length"));
    }
    if grid.len() < 8 {
        return Err(NevError::arg(format!("need at least 8 grid points, got {}", grid.len())));
    }
    let (gmin, gmax) = grid
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    if !(gmin > 0.0) || (gmax / gmin).log10() < 3.0 - 1e-9 {
        return Err(NevError::arg("grid must span at least three decades"));
    }
    let mut idx: Vec<usize> = (0..grid.len()).collect();
    idx.sort_by(|&i, &j| grid[j].total_cmp(&grid[i]));
    let tail: Vec<usize> = idx[idx.len() / 2..].to_vec();
    let tail_vals: Vec<f64> = tail.iter().map(|&i| values[i]).collect();
    let finite = tail_vals.iter().all(|v| v.is_finite());
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .filter(|&&i| values[i] > 0.0 && values[i].is_finite())
        .map(|&i| (grid[i].ln(), values[i].ln()))
        .collect();
    let slope = if pts.len() >= 2 { fit_slope(&pts) } else { 0.0 };
    let bounded = finite && slope >= -0.05;
    let max = tail_vals.iter().fold(0.0f64, |m, &v| m.max(v));
    let limsup = if !bounded {
        Estimate::divergent(1, format!("tail values grow like ε^{slope:.3}"))
    } else if slope > 0.05 || pts.is_empty() {
        Estimate::finite(0.0)
    } else {
        Estimate::finite(max)
    };
    Ok(CcLim {
        limsup,
        bounded,
        slope,
        heuristic: true,
    })
}

impl QuotientSeries {
    pub fn cc_lim(&self) -> Result<CcLim> {
        cc_lim_estimate(&self.grid, &self.values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lebesgue_11() -> PickFunction {
        PickFunction::triple(0.0, 0.0, Measure::uniform(-1.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn julia_fatou_examples() {
        let z = Complex64::new(0.4, 0.3);
        let id = Gauge::identity();
        assert!((julia_fatou(&PickFunction::identity(), &id, z).unwrap() - 1.0).abs() < 1e-15);
        let y = 0.25;
        let v = julia_fatou(&PickFunction::neg_inverse(), &id, Complex64::new(0.0, y)).unwrap();
        assert!((v - 1.0 / (y * y)).abs() < 1e-12);
        let v = julia_fatou(&PickFunction::identity(), &Gauge::constant(1.0), z).unwrap();
        assert!((v - 0.3).abs() < 1e-15);
    }

    #[test]
    fn direct_examples() {
        let (one, id) = (Gauge::constant(1.0), Gauge::identity());
        let v = averaged_quotient_direct(&PickFunction::identity(), &one, &id, 0.0, 0.1).unwrap();
        assert!((v - 0.1).abs() < 1e-14);
        let v = averaged_quotient_direct(&PickFunction::neg_inverse(), &one, &id, 0.0, 0.1).unwrap();
        assert!((v - PI / 0.4).abs() < 1e-10 * v);
        // Im f ≡ π for Lebesgue measure on the line
        let leb = PickFunction::triple(0.0, 0.0, Measure::lebesgue_line()).unwrap();
        let v = averaged_quotient_direct(&leb, &one, &id, 0.0, 0.1).unwrap();
        assert!((v - PI).abs() < 1e-12);
        assert!((averaged_quotient_kernel(&leb, &one, &id, 0.0, 0.1).unwrap() - PI).abs() < 1e-14);
    }

    #[test]
    fn kernel_examples() {
        let (one, id) = (Gauge::constant(1.0), Gauge::identity());
        for eps in [0.3, 0.01] {
            let v = averaged_quotient_kernel(&PickFunction::neg_inverse(), &one, &id, 0.0, eps).unwrap();
            assert!((v - PI / (4.0 * eps)).abs() < 1e-12 * v);
        }
        let v = averaged_quotient_kernel(&PickFunction::identity(), &one, &id, 0.0, 0.1).unwrap();
        assert!((v - 0.1).abs() < 1e-15);
        let sq = Gauge::power(1.0, 2.0);
        let d = averaged_quotient_direct(&lebesgue_11(), &one, &sq, 0.0, 0.05).unwrap();
        let k = averaged_quotient_kernel(&lebesgue_11(), &one, &sq, 0.0, 0.05).unwrap();
        assert!((d - k).abs() < 1e-8 * k);
        let neg = PickFunction::negative_reciprocal(lebesgue_11());
        assert!(matches!(
            averaged_quotient_kernel(&neg, &one, &id, 0.0, 0.1),
            Err(NevError::Unsupported(_))
        ));
    }

    #[test]
    fn cantor_methods_agree_at_small_heights() {
        let f = PickFunction::triple(0.0, 0.0, Measure::cantor()).unwrap();
        let (one, sq) = (Gauge::constant(1.0), Gauge::power(1.0, 2.0));
        for eps in [2f64.powi(-6), 2f64.powi(-12)] {
            let d = averaged_quotient_direct(&f, &one, &sq, 0.0, eps).unwrap();
            let k = averaged_quotient_kernel(&f, &one, &sq, 0.0, eps).unwrap();
            assert!((d - k).abs() <= 1e-6 * k.abs().max(1.0), "ε={eps}: {d} vs {k}");
        }
    }

    #[test]
    fn augur_examples() {
        let (one, id) = (Gauge::constant(1.0), Gauge::identity());
        let delta = Measure::dirac(0.0, 1.0).unwrap();
        let c = AugurConstants { l0: 1f64.atan(), l1: PI, l2: 1.0 };
        let bounds = augur_bounds(&delta, 0.0, &one, &id, 0.0, 0.1, c).unwrap();
        let a = averaged_quotient_kernel(&PickFunction::neg_inverse(), &one, &id, 0.0, 0.1).unwrap();
        assert!((bounds.lower - a).abs() < 1e-12 * a);
        let zero = augur_bounds(&Measure::zero(), 1.0, &one, &id, 0.0, 0.1, c).unwrap();
        assert_eq!(zero.lower, 0.0);
        let steep = Gauge::power(1.0, 0.5);
        assert!(matches!(
            augur_bounds(&delta, 0.0, &one, &steep, 0.0, 0.1, c),
            Err(NevError::Precondition(_))
        ));
    }

    #[test]
    fn augur_tail_term_scaling() {
        // λ = t^α, 𝔨 = t^β: tail term ∝ ε^{α(1−β)−2}
        let (alpha, beta) = (1.5, 0.5);
        let (k, l) = (Gauge::power(1.0, beta), Gauge::power(1.0, alpha));
        let c = AugurConstants { l0: 1.0, l1: PI, l2: 1.0 };
        let mu = Measure::uniform(-1.0, 1.0).unwrap();
        let t1 = augur_bounds(&mu, 0.0, &k, &l, 0.0, 0.01, c).unwrap().upper_tail;
        let t2 = augur_bounds(&mu, 0.0, &k, &l, 0.0, 0.001, c).unwrap().upper_tail;
        let slope = (t2 / t1).ln() / (0.1f64).ln();
        assert!((slope - (alpha * (1.0 - beta) - 2.0)).abs() < 1e-10);
    }

    #[test]
    fn cc_lim_examples() {
        let grid = default_grid();
        let lin: Vec<f64> = grid.iter().map(|e| 0.1 * e).collect();
        let r = cc_lim_estimate(&grid, &lin).unwrap();
        assert!(r.bounded && r.limsup == Estimate::finite(0.0));
        let blow: Vec<f64> = grid.iter().map(|e| PI / (4.0 * e)).collect();
        let r = cc_lim_estimate(&grid, &blow).unwrap();
        assert!(!r.bounded && (r.slope + 1.0).abs() < 1e-12);
        let flat = vec![3.0; grid.len()];
        let r = cc_lim_estimate(&grid, &flat).unwrap();
        assert!(r.bounded && r.limsup == Estimate::finite(3.0));
        assert!(cc_lim_estimate(&grid[..5], &flat[..5]).is_err());
        assert!(cc_lim_estimate(&dyadic_grid(3, 10), &[1.0; 8]).is_err());
    }

    #[test]
    fn zero_function_has_zero_average() {
        let f = PickFunction::triple(1.0, 0.0, Measure::zero()).unwrap();
        let s = quotient_series(&f, &Gauge::constant(1.0), &Gauge::identity(), 0.0, &default_grid(), Method::Kernel)
            .unwrap();
        assert!(s.values.iter().all(|&v| v == 0.0));
    }

    proptest! {
        #[test]
        fn scaling_k_divides_values(c in 0.1f64..10.0, eps_exp in 2i32..15) {
            let eps = 2f64.powi(-eps_exp);
            let f = PickFunction::triple(0.0, 0.5, Measure::atoms(vec![(-0.3, 1.0), (0.2, 0.5)]).unwrap()).unwrap();
            let (k, l) = (Gauge::power(1.0, 0.5), Gauge::identity());
            let a = averaged_quotient_kernel(&f, &k, &l, 0.0, eps).unwrap();
            let b = averaged_quotient_kernel(&f, &Gauge::power(c, 0.5), &l, 0.0, eps).unwrap();
            prop_assert!((a / c - b).abs() <= 1e-14 * b.abs());
            prop_assert!(a >= 0.0);
        }

        #[test]
        fn methods_agree_on_atoms(t1 in -0.5f64..0.5, m in 0.1f64..2.0, eps_exp in 3i32..12) {
            let eps = 2f64.powi(-eps_exp);
            let f = PickFunction::triple(0.0, 0.2, Measure::atoms(vec![(t1, m), (0.7, 1.0)]).unwrap()).unwrap();
            let (k, l) = (Gauge::constant(1.0), Gauge::power(1.0, 2.0));
            let d = averaged_quotient_direct(&f, &k, &l, 0.0, eps).unwrap();
            let kk = averaged_quotient_kernel(&f, &k, &l, 0.0, eps).unwrap();
            prop_assert!((d - kk).abs() <= 1e-6 * kk.abs().max(1.0));
        }
    }
}
