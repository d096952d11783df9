//! Radial integrals `∫ g(|t − τ|) dμ` with a possible singularity at τ,
//! summed over dyadic annuli, and the layer-cake identity check.

use serde::Serialize;

use super::{integrate_component, Component, FnKernel, Measure, Window};
use crate::error::{Estimate, NevError, Result};
use crate::gauges::{fit_slope, Gauge};
use crate::quad::{integrate, partition, QuadOptions};

/// Annuli `2^{-k-1}R < r ≤ 2^{-k}R` for `k < ANNULI`.
const ANNULI: i32 = 64;
/// Number of innermost annuli used for the trend fit.
const TREND_WINDOW: usize = 24;
/// Partial sums above this are declared divergent.
pub const DIVERGENCE_CAP: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialIntegral {
    pub estimate: Estimate,
    /// Per-annulus contributions, outermost first.
    pub terms: Vec<f64>,
    /// Fitted log2 growth rate of the inner terms per annulus.
    pub slope: f64,
}

/// Sum annulus terms; flat or growing inner terms mean divergence.
/// A convergent sum gets a geometric tail correction.
fn sum_annuli(terms: Vec<f64>, atom_at_center: bool) -> RadialIntegral {
    let partial: f64 = terms.iter().sum();
    let tail: Vec<(f64, f64)> = terms[terms.len() - TREND_WINDOW..]
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0)
        .map(|(k, &v)| (k as f64, v.log2()))
        .collect();
    let slope = if tail.len() >= 3 { fit_slope(&tail) } else { f64::NEG_INFINITY };
    let estimate = if atom_at_center {
        Estimate::divergent(1, "atom at the center where the integrand blows up")
    } else if !partial.is_finite() || partial > DIVERGENCE_CAP {
        Estimate::divergent(1, format!("partial sum exceeds {DIVERGENCE_CAP:e}"))
    } else if slope >= -0.05 {
        Estimate::divergent(
            1,
            format!("annulus contributions do not decay (log2 slope {slope:.3})"),
        )
    } else {
        let last = terms.last().copied().unwrap_or(0.0);
        let r = slope.exp2();
        Estimate::finite(partial + if last > 0.0 { last * r / (1.0 - r) } else { 0.0 })
    };
    RadialIntegral {
        estimate,
        terms,
        slope: if slope.is_finite() { slope } else { -f64::INFINITY },
    }
}

/// `∫_{|t−τ| ≤ radius} g(|t − τ|) dμ(t)`. `g_at_zero` is the value used for
/// an atom at τ; `None` means `g(0⁺) = ∞`.
pub fn radial_integral<G>(
    mu: &Measure,
    tau: f64,
    radius: f64,
    g: G,
    g_at_zero: Option<f64>,
) -> Result<RadialIntegral>
where
    G: Fn(f64) -> f64 + Sync,
{
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(NevError::arg("radial integral needs a positive finite radius"));
    }
    let kernel = FnKernel {
        f: |t: f64| g((t - tau).abs()),
        singular_points: vec![tau],
    };
    let mut atom_at_center = false;
    let mut center_mass = 0.0;
    let mut terms = vec![0.0; ANNULI as usize];
    for c in mu.components() {
        match c {
            Component::Atomic(a) => {
                for &(t, m) in a.atoms() {
                    let r = (t - tau).abs();
                    if r == 0.0 {
                        match g_at_zero {
                            Some(v) => center_mass += m * v,
                            None => atom_at_center = true,
                        }
                        continue;
                    }
                    if r > radius {
                        continue;
                    }
                    let k = ((radius / r).log2().ceil() as i32 - 1).clamp(0, ANNULI - 1);
                    terms[k as usize] += m * g(r);
                }
            }
            Component::LebesgueLine { density } => {
                for k in 0..ANNULI {
                    let (a, b) = (radius * 2f64.powi(-k - 1), radius * 2f64.powi(-k));
                    let r = integrate(&g, &[a, b], QuadOptions::rel(1e-12))?;
                    terms[k as usize] += 2.0 * density * r.value;
                }
            }
            other => {
                for k in 0..ANNULI {
                    let (a, b) = (radius * 2f64.powi(-k - 1), radius * 2f64.powi(-k));
                    let left = integrate_component(other, &kernel, Some(Window::closed(tau - b, tau - a)))?;
                    let right = integrate_component(other, &kernel, Some(Window::closed(tau + a, tau + b)))?;
                    terms[k as usize] += left + right;
                }
            }
        }
    }
    let mut out = sum_annuli(terms, atom_at_center);
    if let Estimate::Finite { value } = out.estimate {
        out.estimate = Estimate::finite(value + center_mass);
    }
    Ok(out)
}

/// Radii at which `s ↦ μ([τ − s, τ + s])` is not smooth.
fn kink_radii(mu: &Measure, tau: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for c in mu.components() {
        match c {
            Component::Atomic(a) => out.extend(a.atoms().iter().map(|&(t, _)| (t - tau).abs())),
            Component::Density(d) => out.extend(d.breakpoints().iter().map(|&t| (t - tau).abs())),
            Component::PowerDensity(p) => {
                let (c0, r) = (p.center, p.radius);
                out.extend([c0 - r, c0, c0 + r].iter().map(|&t| (t - tau).abs()));
            }
            Component::SelfSimilar(s) => {
                let (a, b) = s.support();
                out.extend([(a - tau).abs(), (b - tau).abs()]);
            }
            Component::LebesgueLine { .. } => {}
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerCake {
    /// `∫_{[τ−1, τ+1]} 1/γ(|t − τ|) dμ`
    pub lhs: Estimate,
    /// `∫₀¹ μ([τ−s, τ+s]) γ'(s)/γ(s)² ds + μ([τ−1, τ+1])/γ(1)`
    pub rhs: Estimate,
    /// `lhs − rhs`, or a divergence sentinel when either side diverges.
    pub residual: Estimate,
}

/// Both sides of the layer-cake identity for `1/γ` about τ.
pub fn layer_cake_residual(mu: &Measure, gamma: &Gauge, tau: f64) -> Result<LayerCake> {
    if !gamma.is_nondecreasing() {
        return Err(NevError::arg(format!("γ = {gamma} is not monotone increasing")));
    }
    if !(gamma.eval(1.0) > 0.0) {
        return Err(NevError::arg("γ must be positive on (0, 1]"));
    }
    let g0 = gamma.limit_at_zero();
    let g_at_zero = (g0 > 0.0 && g0.is_finite()).then(|| 1.0 / g0);
    let lhs = radial_integral(mu, tau, 1.0, |r| 1.0 / gamma.eval(r), g_at_zero)?;

    let center = mu.interval_mass(Window::closed(tau, tau));
    let kinks = kink_radii(mu, tau);
    let mut terms = vec![0.0; ANNULI as usize];
    for k in 0..ANNULI {
        let (a, b) = (2f64.powi(-k - 1), 2f64.powi(-k));
        let r = integrate(
            |s: f64| {
                let g = gamma.eval(s);
                mu.interval_mass(Window::closed(tau - s, tau + s)) * gamma.derivative(s) / (g * g)
            },
            &partition(a, b, &kinks),
            QuadOptions::rel(1e-11),
        )?;
        terms[k as usize] = r.value;
    }
    let rhs_sum = sum_annuli(terms, center > 0.0 && g_at_zero.is_none());
    let boundary = mu.interval_mass(Window::closed(tau - 1.0, tau + 1.0)) / gamma.eval(1.0);
    // An atom at τ with finite 1/γ(0): the layer integral picks up
    // m·(1/γ(0) − 1/γ(1)), matching the left side.
    let rhs = match rhs_sum.estimate {
        Estimate::Finite { value } => Estimate::finite(value + boundary),
        d => d,
    };
    let residual = match (&lhs.estimate, &rhs) {
        (Estimate::Finite { value: l }, Estimate::Finite { value: r }) => Estimate::finite(l - r),
        (Estimate::Divergent { .. }, Estimate::Divergent { .. }) => {
            Estimate::divergent(1, "both sides diverge")
        }
        (Estimate::Divergent { reason, .. }, _) => {
            Estimate::divergent(1, format!("only the left side diverges: {reason}"))
        }
        (_, Estimate::Divergent { reason, .. }) => {
            Estimate::divergent(-1, format!("only the right side diverges: {reason}"))
        }
    };
    Ok(LayerCake {
        lhs: lhs.estimate,
        rhs,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lebesgue_sqrt_gauge() {
        // ∫_{-1}^{1} |t|^{-1/2} dt = 4
        let lc = layer_cake_residual(&Measure::uniform(-1.0, 1.0).unwrap(), &Gauge::power(1.0, 0.5), 0.0)
            .unwrap();
        assert!((lc.lhs.value().unwrap() - 4.0).abs() < 1e-8);
        assert!(lc.residual.value().unwrap().abs() < 1e-6);
    }

    #[test]
    fn shifted_atom_linear_gauge() {
        let lc = layer_cake_residual(&Measure::dirac(0.5, 1.0).unwrap(), &Gauge::identity(), 0.0).unwrap();
        assert!((lc.lhs.value().unwrap() - 2.0).abs() < 1e-12);
        assert!(lc.residual.value().unwrap().abs() < 1e-6);
    }

    #[test]
    fn atom_at_center_diverges_on_both_sides() {
        let lc = layer_cake_residual(&Measure::dirac(0.0, 1.0).unwrap(), &Gauge::power(1.0, 0.5), 0.0).unwrap();
        assert!(!lc.lhs.is_finite() && !lc.rhs.is_finite());
        assert_eq!(lc.residual.as_f64(), 1e308);
    }

    #[test]
    fn harmonic_divergence_is_detected() {
        let lc = layer_cake_residual(&Measure::uniform(-1.0, 1.0).unwrap(), &Gauge::identity(), 0.0).unwrap();
        assert!(!lc.lhs.is_finite() && !lc.rhs.is_finite());
    }

    #[test]
    fn constant_gauge_counts_center_atom() {
        let lc = layer_cake_residual(&Measure::dirac(0.0, 3.0).unwrap(), &Gauge::constant(2.0), 0.0).unwrap();
        assert!((lc.lhs.value().unwrap() - 1.5).abs() < 1e-12);
        assert!(lc.residual.value().unwrap().abs() < 1e-12);
    }

    #[test]
    fn decreasing_gauge_rejected() {
        let r = layer_cake_residual(&Measure::uniform(-1.0, 1.0).unwrap(), &Gauge::power(1.0, -0.5), 0.0);
        assert!(matches!(r, Err(NevError::Argument(_))));
    }
}
