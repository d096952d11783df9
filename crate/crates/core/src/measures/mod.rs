//! Positive Borel measures on ℝ built from atomic, piecewise-polynomial,
//! power-law and self-similar components, with their window masses,
//! Poisson extensions and Cauchy integrals.

mod kernels;
mod layer_cake;
mod selfsim;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{NevError, Result};
use crate::quad::{integrate, partition, QuadOptions};

pub use kernels::{ArctanWindowKernel, CauchyRealKernel, FnKernel, PoissonKernel};
pub use layer_cake::{layer_cake_residual, radial_integral, LayerCake, RadialIntegral, DIVERGENCE_CAP};
pub use selfsim::{SelfSimilarComponent, DEFAULT_ETA};

/// A real integrand with known singularities off (or on) the real line.
pub trait Kernel: Sync {
    fn value(&self, t: f64) -> f64;

    /// Value and first three derivatives at `t`. The default uses central
    /// differences with step `h`.
    fn taylor(&self, t: f64, h: f64) -> [f64; 4] {
        let g0 = self.value(t);
        let (gp, gm) = (self.value(t + h), self.value(t - h));
        let (gp2, gm2) = (self.value(t + 2.0 * h), self.value(t - 2.0 * h));
        [
            g0,
            (gp - gm) / (2.0 * h),
            (gp - 2.0 * g0 + gm) / (h * h),
            (gp2 - 2.0 * gp + 2.0 * gm - gm2) / (2.0 * h * h * h),
        ]
    }

    /// Distance from `t` to the nearest singularity of the kernel.
    fn singular_distance(&self, t: f64) -> f64;

    /// Real points where the kernel varies fastest (quadrature breakpoints).
    fn peaks(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// Integration window `[lo, hi]`; `closed` decides whether atoms sitting
/// exactly on an endpoint are counted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
    pub closed: bool,
}

impl Window {
    pub fn open(lo: f64, hi: f64) -> Self {
        Window { lo, hi, closed: false }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Window { lo, hi, closed: true }
    }

    pub fn contains(&self, t: f64) -> bool {
        if self.closed {
            t >= self.lo && t <= self.hi
        } else {
            t > self.lo && t < self.hi
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomicComponent {
    atoms: Vec<(f64, f64)>,
}

impl AtomicComponent {
    /// Atoms as `(location, mass)`, locations strictly increasing.
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        for &(t, m) in &atoms {
            if !t.is_finite() {
                return Err(NevError::arg(format!("atom location {t} is not finite")));
            }
            if !(m > 0.0 && m.is_finite()) {
                return Err(NevError::arg(format!("atom at {t} has nonpositive mass {m}")));
            }
        }
        if atoms.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(NevError::arg("atom locations must be strictly increasing"));
        }
        Ok(AtomicComponent { atoms })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }
}

/// Piecewise polynomial density; `pieces[i]` holds the coefficients
/// `c₀..c₃` of `Σ cₖ tᵏ` on `[breakpoints[i], breakpoints[i+1]]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityComponent {
    breakpoints: Vec<f64>,
    pieces: Vec<[f64; 4]>,
}

impl DensityComponent {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<[f64; 4]>) -> Result<Self> {
        if breakpoints.len() < 2 || pieces.len() + 1 != breakpoints.len() {
            return Err(NevError::arg(
                "density: need n+1 breakpoints for n polynomial pieces",
            ));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(NevError::arg("density: breakpoints must be finite"));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(NevError::arg("density: breakpoints must be strictly increasing"));
        }
        for (i, (w, c)) in breakpoints.windows(2).zip(&pieces).enumerate() {
            let (a, b) = (w[0], w[1]);
            let scale = c.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1.0);
            let mut samples = vec![a, b];
            let n = 16;
            for k in 0..n {
                let x = ((2 * k + 1) as f64 * PI / (2 * n) as f64).cos();
                samples.push(0.5 * (a + b) + 0.5 * (b - a) * x);
            }
            if let Some(&t) = samples.iter().find(|&&t| poly(c, t) < -1e-12 * scale) {
                return Err(NevError::arg(format!(
                    "density: piece {i} is negative at t = {t}"
                )));
            }
        }
        Ok(DensityComponent { breakpoints, pieces })
    }

    /// Constant density on `[a, b]`.
    pub fn uniform(a: f64, b: f64, height: f64) -> Result<Self> {
        Self::new(vec![a, b], vec![[height, 0.0, 0.0, 0.0]])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, &[f64; 4])> {
        self.breakpoints
            .windows(2)
            .zip(&self.pieces)
            .map(|(w, c)| (w[0], w[1], c))
    }
}

/// Density `coeff·|t − center|^exponent` on `[center − radius, center + radius]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerDensityComponent {
    pub center: f64,
    pub radius: f64,
    pub coeff: f64,
    pub exponent: f64,
}

impl PowerDensityComponent {
    pub fn new(center: f64, radius: f64, coeff: f64, exponent: f64) -> Result<Self> {
        if !(center.is_finite() && radius > 0.0 && radius.is_finite()) {
            return Err(NevError::arg("power density: need finite center and positive radius"));
        }
        if !(coeff > 0.0 && coeff.is_finite()) {
            return Err(NevError::arg("power density: coefficient must be positive"));
        }
        if !(exponent > -1.0 && exponent.is_finite()) {
            return Err(NevError::arg(
                "power density: exponent must exceed -1 for local integrability",
            ));
        }
        Ok(PowerDensityComponent {
            center,
            radius,
            coeff,
            exponent,
        })
    }

    fn signed_primitive(&self, u: f64) -> f64 {
        let u = u.clamp(-self.radius, self.radius);
        let q = self.exponent + 1.0;
        self.coeff * u.signum() * u.abs().powf(q) / q
    }

    fn interval_mass(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        self.signed_primitive(hi - self.center) - self.signed_primitive(lo - self.center)
    }

    /// `∫ k dμ` over the component. Near the center the substitution
    /// `v = |t − center|^{p+1}` removes the algebraic singularity; around
    /// kernel peaks the integral runs in `u = |t − center|` directly, since
    /// recovering `u` from `v` costs more precision than a narrow peak allows.
    fn integrate<K: Kernel + ?Sized>(&self, kernel: &K, window: Option<Window>, opts: QuadOptions) -> Result<f64> {
        let q = self.exponent + 1.0;
        let inv_q = 1.0 / q;
        let peaks = kernel.peaks();
        let center = self.center;
        let mut total = 0.0;
        for side in [-1.0f64, 1.0] {
            // u ranges over [0, radius] along this side
            let (mut u0, mut u1) = (0.0f64, self.radius);
            if let Some(w) = window {
                let (a, b) = if side > 0.0 {
                    (w.lo - center, w.hi - center)
                } else {
                    (center - w.hi, center - w.lo)
                };
                u0 = u0.max(a);
                u1 = u1.min(b);
            }
            if u1 <= u0 {
                continue;
            }
            let mut us = Vec::new();
            let mut split = u1;
            for &p in &peaks {
                let up = side * (p - center);
                if !(up > u0 && up < u1) {
                    continue;
                }
                split = split.min(0.5 * up);
                us.push(up);
                let d = kernel.singular_distance(p);
                if d > 0.0 && d.is_finite() {
                    let mut off = 0.5 * d;
                    while off < u1 - u0 {
                        us.extend([up - off, up + off]);
                        off *= 2.0;
                    }
                }
            }
            let split = split.max(u0);
            if split > u0 {
                let r = integrate(
                    |v: f64| kernel.value(center + side * v.max(0.0).powf(inv_q)),
                    &[u0.powf(q), split.powf(q)],
                    opts,
                )?;
                total += r.value * self.coeff * inv_q;
            }
            if u1 > split {
                let r = integrate(
                    |u: f64| self.coeff * u.powf(self.exponent) * kernel.value(center + side * u),
                    &partition(split, u1, &us),
                    opts,
                )?;
                total += r.value;
            }
        }
        Ok(total)
    }
}

impl PowerDensityComponent {
    fn density(&self, t: f64) -> f64 {
        let u = (t - self.center).abs();
        if u > self.radius {
            0.0
        } else {
            self.coeff * u.powf(self.exponent)
        }
    }

    /// `∫ (1/(t − z) − t/(1 + t²)) dμ`. Near `Re z` the density value there
    /// is subtracted and integrated in closed form, so the real part does not
    /// rely on cancellation across a peak of width `Im z`.
    /// With `with_real == false` the real part of the result is not computed.
    fn cauchy(&self, z: Complex64, with_real: bool, opts: QuadOptions) -> Result<Complex64> {
        let x0 = z.re;
        let (lo, hi) = (self.center - self.radius, self.center + self.radius);
        let gap = (x0 - self.center).abs().min(x0 - lo).min(hi - x0);
        let (real, poisson) = (CauchyRealKernel { z }, PoissonKernel { z });
        let part = |w: Option<Window>| -> Result<Complex64> {
            let re = if with_real { self.integrate(&real, w, opts)? } else { 0.0 };
            Ok(Complex64::new(re, self.integrate(&poisson, w, opts)?))
        };
        if !(gap > 0.0) {
            return part(None);
        }
        let delta = 0.5 * gap;
        let (a, b) = (x0 - delta, x0 + delta);
        let outer = part(Some(Window::closed(lo, a)))? + part(Some(Window::closed(b, hi)))?;
        let rho0 = self.density(x0);
        let mut pts = vec![a, x0, b];
        let mut off = 0.5 * z.im;
        while off < delta {
            pts.extend([x0 - off, x0 + off]);
            off *= 2.0;
        }
        let local = integrate(
            |t: f64| {
                let rho = self.density(t);
                (rho - rho0) / (Complex64::new(t, 0.0) - z) - rho * t / (1.0 + t * t)
            },
            &partition(a, b, &pts),
            opts,
        )?;
        let log = ((Complex64::new(b, 0.0) - z) / (Complex64::new(a, 0.0) - z)).ln();
        let mut total = outer + local.value + rho0 * log;
        if !with_real {
            total.re = 0.0;
        }
        Ok(total)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Component {
    Atomic(AtomicComponent),
    Density(DensityComponent),
    PowerDensity(PowerDensityComponent),
    SelfSimilar(SelfSimilarComponent),
    /// Constant density on all of ℝ; its Nevanlinna integral is `iπ·density`.
    LebesgueLine { density: f64 },
}

/// Finite sum of components.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measure {
    name: String,
    components: Vec<Component>,
}

fn poly(c: &[f64; 4], t: f64) -> f64 {
    ((c[3] * t + c[2]) * t + c[1]) * t + c[0]
}

fn poly_primitive(c: &[f64; 4], t: f64) -> f64 {
    (((c[3] / 4.0 * t + c[2] / 3.0) * t + c[1] / 2.0) * t + c[0]) * t
}

/// `∫_a^b p(t)/(t − z) dt` in closed form: divide `p` by `t − z` and
/// integrate the quotient plus `p(z)·log`.
fn poly_cauchy(c: &[f64; 4], a: f64, b: f64, z: Complex64) -> Complex64 {
    let q2 = Complex64::new(c[3], 0.0);
    let q1 = c[2] + c[3] * z;
    let q0 = c[1] + c[2] * z + c[3] * z * z;
    let pz = c[0] + z * (c[1] + z * (c[2] + z * c[3]));
    let prim = |t: f64| ((q2 / 3.0 * t + q1 / 2.0) * t + q0) * t;
    let logs = (Complex64::new(b, 0.0) - z).ln() - (Complex64::new(a, 0.0) - z).ln();
    prim(b) - prim(a) + pz * logs
}

impl Measure {
    pub fn new(name: impl Into<String>, components: Vec<Component>) -> Result<Self> {
        for c in &components {
            if let Component::LebesgueLine { density } = c {
                if !(*density > 0.0 && density.is_finite()) {
                    return Err(NevError::arg("Lebesgue-line density must be positive"));
                }
            }
        }
        Ok(Measure {
            name: name.into(),
            components,
        })
    }

    pub fn zero() -> Self {
        Measure {
            name: "zero".into(),
            components: Vec::new(),
        }
    }

    pub fn dirac(at: f64, mass: f64) -> Result<Self> {
        Self::new(
            format!("delta({at})"),
            vec![Component::Atomic(AtomicComponent::new(vec![(at, mass)])?)],
        )
    }

    pub fn atoms(atoms: Vec<(f64, f64)>) -> Result<Self> {
        Self::new("atoms", vec![Component::Atomic(AtomicComponent::new(atoms)?)])
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Self::new(
            format!("lebesgue[{a},{b}]"),
            vec![Component::Density(DensityComponent::uniform(a, b, 1.0)?)],
        )
    }

    pub fn power_density(center: f64, radius: f64, coeff: f64, exponent: f64) -> Result<Self> {
        Self::new(
            format!("|t-{center}|^{exponent}"),
            vec![Component::PowerDensity(PowerDensityComponent::new(
                center, radius, coeff, exponent,
            )?)],
        )
    }

    pub fn cantor() -> Self {
        Measure {
            name: "cantor".into(),
            components: vec![Component::SelfSimilar(SelfSimilarComponent::cantor())],
        }
    }

    pub fn lebesgue_line() -> Self {
        Measure {
            name: "lebesgue_line".into(),
            components: vec![Component::LebesgueLine { density: 1.0 }],
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Sum of two measures.
    pub fn plus(mut self, other: Measure) -> Self {
        self.components.extend(other.components);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    pub fn is_compact(&self) -> bool {
        !self
            .components
            .iter()
            .any(|c| matches!(c, Component::LebesgueLine { .. }))
    }

    /// Locations of all atoms (quadrature hints).
    pub fn atom_locations(&self) -> Vec<f64> {
        self.components
            .iter()
            .filter_map(|c| match c {
                Component::Atomic(a) => Some(a.atoms.iter().map(|&(t, _)| t)),
                _ => None,
            })
            .flatten()
            .collect()
    }

    /// Atoms as `(location, mass)` pairs across all atomic components.
    pub fn atom_list(&self) -> Vec<(f64, f64)> {
        self.components
            .iter()
            .filter_map(|c| match c {
                Component::Atomic(a) => Some(a.atoms.iter().copied()),
                _ => None,
            })
            .flatten()
            .collect()
    }

    /// Total mass; infinite when a Lebesgue-line component is present.
    pub fn total_mass(&self) -> f64 {
        self.interval_mass(Window::closed(f64::NEG_INFINITY, f64::INFINITY))
    }

    /// `μ((τ − ε, τ + ε))`, the open window.
    pub fn window_mass(&self, tau: f64, eps: f64) -> Result<f64> {
        if !(eps > 0.0) {
            return Err(NevError::arg(format!("window half-width must be positive, got {eps}")));
        }
        Ok(self.interval_mass(Window::open(tau - eps, tau + eps)))
    }

    /// `μ([τ − ε, τ + ε])`, the closed window.
    pub fn window_mass_closed(&self, tau: f64, eps: f64) -> Result<f64> {
        if !(eps >= 0.0) {
            return Err(NevError::arg(format!("window half-width must be nonnegative, got {eps}")));
        }
        Ok(self.interval_mass(Window::closed(tau - eps, tau + eps)))
    }

    pub fn interval_mass(&self, w: Window) -> f64 {
        let (lo, hi) = (w.lo, w.hi);
        self.components
            .iter()
            .map(|c| match c {
                Component::Atomic(a) => a
                    .atoms
                    .iter()
                    .filter(|&&(t, _)| w.contains(t))
                    .map(|&(_, m)| m)
                    .sum(),
                Component::Density(d) => d
                    .pieces()
                    .map(|(a, b, c)| {
                        let (x0, x1) = (a.max(lo), b.min(hi));
                        if x1 > x0 {
                            poly_primitive(c, x1) - poly_primitive(c, x0)
                        } else {
                            0.0
                        }
                    })
                    .sum(),
                Component::PowerDensity(p) => p.interval_mass(lo, hi),
                Component::SelfSimilar(s) => s.interval_mass(lo, hi),
                Component::LebesgueLine { density } => density * (hi - lo),
            })
            .sum()
    }

    /// `∫ y/((t − x)² + y²) dμ(t)`.
    pub fn poisson_extension(&self, x: f64, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return Err(NevError::arg(format!("Poisson extension needs y > 0, got {y}")));
        }
        let z = Complex64::new(x, y);
        let kernel = PoissonKernel { z };
        let mut total = 0.0;
        for c in &self.components {
            total += match c {
                Component::Atomic(a) => a.atoms.iter().map(|&(t, m)| m * kernel.value(t)).sum(),
                Component::Density(d) => d.pieces().map(|(a, b, c)| poly_cauchy(c, a, b, z).im).sum(),
                Component::LebesgueLine { density } => PI * density,
                Component::PowerDensity(p) => p.cauchy(z, false, quad_opts())?.im,
                other => integrate_component(other, &kernel, None)?,
            };
        }
        Ok(total)
    }

    /// `∫ (1/(t − z) − t/(1 + t²)) dμ(t)` for `Im z > 0`.
    pub fn cauchy_integral(&self, z: Complex64) -> Result<Complex64> {
        if !(z.im > 0.0) {
            return Err(NevError::Domain(format!(
                "Cauchy integral needs Im z > 0, got {z}"
            )));
        }
        let real_kernel = CauchyRealKernel { z };
        let mut total = Complex64::new(0.0, 0.0);
        for c in &self.components {
            total += match c {
                Component::Atomic(a) => a
                    .atoms
                    .iter()
                    .map(|&(t, m)| m * (1.0 / (Complex64::new(t, 0.0) - z) - t / (1.0 + t * t)))
                    .sum(),
                Component::Density(d) => d
                    .pieces()
                    .map(|(a, b, c)| {
                        poly_cauchy(c, a, b, z) - poly_cauchy(c, a, b, Complex64::i()).re
                    })
                    .sum(),
                Component::LebesgueLine { density } => Complex64::new(0.0, PI * density),
                Component::PowerDensity(p) => p.cauchy(z, true, quad_opts())?,
                other => {
                    let re = integrate_component(other, &real_kernel, None)?;
                    let im = integrate_component(other, &PoissonKernel { z }, None)?;
                    Complex64::new(re, im)
                }
            };
        }
        Ok(total)
    }

    /// `∫ k dμ` over the (optional) window. Lebesgue-line components are
    /// rejected: they need a closed form supplied by the caller.
    pub fn integrate<K: Kernel + ?Sized>(&self, kernel: &K, window: Option<Window>) -> Result<f64> {
        let mut total = 0.0;
        for c in &self.components {
            total += integrate_component(c, kernel, window)?;
        }
        Ok(total)
    }

    /// Points of `[lo, hi]` where the measure is irregular at scale
    /// `resolution`: atoms, density breakpoints and self-similar cell edges.
    pub fn boundary_hints(&self, lo: f64, hi: f64, resolution: f64) -> Vec<f64> {
        let mut h = Vec::new();
        for c in &self.components {
            match c {
                Component::Atomic(a) => h.extend(a.atoms.iter().map(|&(t, _)| t)),
                Component::Density(d) => h.extend_from_slice(d.breakpoints()),
                Component::PowerDensity(p) => h.extend([p.center - p.radius, p.center, p.center + p.radius]),
                Component::SelfSimilar(s) => h.extend(s.cell_edges(lo, hi, resolution, 20_000)),
                Component::LebesgueLine { .. } => {}
            }
        }
        h.retain(|&t| t >= lo && t <= hi);
        h
    }

    /// `∫ dμ(t) / (1 + (t − τ)²)`, the tail weight of the measure seen from τ.
    pub fn tail_weight(&self, tau: f64) -> Result<f64> {
        self.poisson_extension(tau, 1.0)
    }
}

fn quad_opts() -> QuadOptions {
    QuadOptions::rel(1e-10)
}

pub(crate) fn integrate_component<K: Kernel + ?Sized>(
    c: &Component,
    kernel: &K,
    window: Option<Window>,
) -> Result<f64> {
    match c {
        Component::Atomic(a) => Ok(a
            .atoms
            .iter()
            .filter(|&&(t, _)| window.map_or(true, |w| w.contains(t)))
            .map(|&(t, m)| m * kernel.value(t))
            .sum()),
        Component::Density(d) => {
            let peaks = kernel.peaks();
            let mut total = 0.0;
            for (a, b, coeffs) in d.pieces() {
                let (lo, hi) = match window {
                    Some(w) => (a.max(w.lo), b.min(w.hi)),
                    None => (a, b),
                };
                if hi <= lo {
                    continue;
                }
                let r = integrate(
                    |t: f64| poly(coeffs, t) * kernel.value(t),
                    &partition(lo, hi, &peaks),
                    quad_opts(),
                )?;
                total += r.value;
            }
            Ok(total)
        }
        Component::PowerDensity(p) => p.integrate(kernel, window, quad_opts()),
        Component::SelfSimilar(s) => Ok(s.integrate(kernel, window, DEFAULT_ETA)),
        Component::LebesgueLine { .. } => Err(NevError::Unsupported(
            "generic integration against Lebesgue measure on ℝ".into(),
        )),
    }
}
