//! Boundary behaviour of a Pick function at a point: spectral class from
//! the vertical ray, enigma membership, conformal invariance, Stolz-type
//! approach regions and horocyclic continuity.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{NevError, Result};
use crate::gauges::{asymptotic_class, compose, fit_slope, is_augury_sweep, product, Gauge, Monotonicity};
use crate::netgen::halton2;
use crate::pick::{mobius_compose, MobiusMap, PickFunction};
use crate::quotients::{cc_lim_estimate, default_grid, quotient_series, CcLim, Method};

// ---------------------------------------------------------------- Stolz

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StolzSpec {
    /// `Im z ≥ M·|z − τ|` with aperture `M ∈ (0, 1]`.
    Classical { m: f64 },
    /// `Im z ≥ λ(C)` and `|Re z − τ| ≤ C` for some `C > 0`.
    Lambda { lambda: Gauge },
}

fn require_monotone(g: &Gauge, role: &str) -> Result<()> {
    let ok = match g {
        Gauge::Table(t) => matches!(t.monotonicity(), Monotonicity::Increasing | Monotonicity::Constant),
        other => other.is_nondecreasing(),
    };
    if ok {
        Ok(())
    } else {
        Err(NevError::arg(format!("{role} = {g} must be monotone increasing")))
    }
}

/// Largest `C` with `λ(C) ≤ y`, by bisection (`∞` if λ stays below y).
pub fn stolz_half_width(lambda: &Gauge, y: f64) -> Result<f64> {
    require_monotone(lambda, "λ")?;
    if lambda.limit_at_zero() > y {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while lambda.eval(hi) <= y {
        hi *= 2.0;
        if hi > 1e12 {
            return Ok(f64::INFINITY);
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if lambda.eval(mid) <= y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

pub fn stolz_membership(z: Complex64, tau: f64, spec: &StolzSpec) -> Result<bool> {
    if !(z.im > 0.0) {
        return Err(NevError::Domain(format!("Stolz regions live in Im z > 0, got {z}")));
    }
    match spec {
        StolzSpec::Classical { m } => {
            if !(*m > 0.0 && *m <= 1.0) {
                return Err(NevError::arg(format!("aperture {m} not in (0, 1]")));
            }
            Ok(z.im >= m * (z - tau).norm())
        }
        StolzSpec::Lambda { lambda } => {
            let w = stolz_half_width(lambda, z.im)?;
            Ok((z.re - tau).abs() <= w * (1.0 + 1e-12))
        }
    }
}

// ---------------------------------------------------------- classification

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpectralClass {
    Ethereal,
    Julia,
    TrueAC,
    Crypto,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralVerdict {
    pub tau: f64,
    pub class: SpectralClass,
    /// Limit along the ray; `None` when it does not exist or is `∞`.
    pub nt_limit: Option<Complex64>,
    /// `(y, Im f(τ+iy)/y)` along the ray.
    pub julia_trace: Vec<(f64, f64)>,
    pub diagnostics: String,
    pub heuristic: bool,
}

/// Heights `2^{-k}`, `k = 0..=27`, used for the vertical ray.
pub fn ray_heights() -> Vec<f64> {
    (0..=27).map(|k| 2f64.powi(-k)).collect()
}

const TAIL: usize = 12;

fn slope_vs_log_y(ys: &[f64], vals: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = ys
        .iter()
        .zip(vals)
        .filter(|(_, &v)| v > 0.0 && v.is_finite())
        .map(|(&y, &v)| (y.ln(), v.ln()))
        .collect();
    fit_slope(&pts)
}

/// Classify from samples `w_k = f(τ + i·y_k)` with `y_k` decreasing.
pub fn classify_ray(tau: f64, ys: &[f64], ws: &[Complex64]) -> Result<SpectralVerdict> {
    if ys.len() != ws.len() || ys.len() < 2 * TAIL {
        return Err(NevError::arg(format!("need at least {} ray samples", 2 * TAIL)));
    }
    let n = ys.len();
    let (ty, tw) = (&ys[n - TAIL..], &ws[n - TAIL..]);
    let julia_trace: Vec<(f64, f64)> = ys.iter().zip(ws).map(|(&y, w)| (y, w.im / y)).collect();
    let verdict = |class, nt_limit, diagnostics: String| {
        Ok(SpectralVerdict {
            tau,
            class,
            nt_limit,
            julia_trace: julia_trace.clone(),
            diagnostics,
            heuristic: true,
        })
    };

    // pole: y·|f| settles at a positive constant
    let py: Vec<f64> = ty.iter().zip(tw).map(|(&y, w)| y * w.norm()).collect();
    let (pmin, pmax) = py.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    if pmin > 1e-6 && (pmax - pmin) <= 1e-3 * pmax {
        return verdict(SpectralClass::Julia, None, format!("pole: y·|f| → {pmax:.6e}"));
    }

    let mods: Vec<f64> = tw.iter().map(|w| w.norm()).collect();
    let ims: Vec<f64> = tw.iter().map(|w| w.im).collect();
    let im_slope = slope_vs_log_y(ty, &ims);
    let mod_slope = slope_vs_log_y(ty, &mods);
    if mod_slope < -0.05 && mods[TAIL - 1] > 1.0 {
        return verdict(
            SpectralClass::Crypto,
            None,
            format!("|f| → ∞ without a pole (log-log slope {mod_slope:.3}, Im slope {im_slope:.3})"),
        );
    }

    // convergence: increments negligible or decaying geometrically
    let incs: Vec<f64> = tw.windows(2).map(|p| (p[1] - p[0]).norm()).collect();
    let last = tw[TAIL - 1];
    let scale = 1.0 + last.norm();
    let inc_pts: Vec<(f64, f64)> = incs
        .iter()
        .enumerate()
        .filter(|(_, &d)| d > 0.0)
        .map(|(k, &d)| (k as f64, d.log2()))
        .collect();
    let inc_slope = if inc_pts.len() >= 3 { fit_slope(&inc_pts) } else { f64::NEG_INFINITY };
    let tiny = incs.iter().all(|&d| d <= 1e-9 * scale);
    let converges = tiny || (inc_slope <= -0.2 && incs[incs.len() - 1] <= 1e-2 * scale);
    if !converges {
        let spread = tw.iter().map(|w| (w - last).norm()).fold(0.0, f64::max);
        return verdict(
            SpectralClass::Ethereal,
            None,
            format!("no limit along the ray: tail spread {spread:.3e}, increment slope {inc_slope:.3}"),
        );
    }
    // geometric tail correction of the limit
    let limit = if !tiny && inc_slope.is_finite() {
        let r = inc_slope.exp2();
        let d = tw[TAIL - 1] - tw[TAIL - 2];
        last + d * (r / (1.0 - r))
    } else {
        last
    };
    let js: Vec<f64> = ty.iter().zip(tw).map(|(&y, w)| w.im / y).collect();
    let j_bounded = js.iter().all(|j| j.is_finite()) && slope_vs_log_y(ty, &js) >= -0.05;
    if j_bounded {
        return verdict(
            SpectralClass::Julia,
            Some(Complex64::new(limit.re, 0.0)),
            format!("B-point: Julia quotient bounded (max {:.6e})", js.iter().fold(0.0f64, |a, &b| a.max(b))),
        );
    }
    let im_tol = 1e-6 * scale;
    if limit.im > im_tol && im_slope.abs() <= 0.05 {
        return verdict(SpectralClass::TrueAC, Some(limit), format!("Im f → {:.6e}", limit.im));
    }
    verdict(
        SpectralClass::Crypto,
        Some(Complex64::new(limit.re, 0.0)),
        format!("real limit {:.6e} with unbounded Julia quotient", limit.re),
    )
}

pub fn classify_point(f: &PickFunction, tau: f64) -> Result<SpectralVerdict> {
    let ys = ray_heights();
    let ws = ys
        .iter()
        .map(|&y| f.evaluate(Complex64::new(tau, y)))
        .collect::<Result<Vec<_>>>()?;
    classify_ray(tau, &ys, &ws)
}

/// Classify each point; points are independent and run in parallel.
pub fn foliate(f: &PickFunction, taus: &[f64]) -> Result<Vec<SpectralVerdict>> {
    taus.par_iter().map(|&t| classify_point(f, t)).collect()
}

// ------------------------------------------------------------------ enigma

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnigmaReport {
    pub member: bool,
    pub direct_branch: CcLim,
    pub reciprocal_branch: CcLim,
}

fn branch(f: &PickFunction, k: &Gauge, lambda: &Gauge, tau: f64) -> Result<CcLim> {
    let method = if f.as_triple().is_some() { Method::Kernel } else { Method::Direct };
    let grid = default_grid();
    let s = quotient_series(f, k, lambda, tau, &grid, method)?;
    cc_lim_estimate(&s.grid, &s.values)
}

/// τ is a (𝔨, λ)-enigma of f when the averaged quotient of f or of −1/f
/// stays bounded.
pub fn enigma_member(f: &PickFunction, k: &Gauge, lambda: &Gauge, tau: f64) -> Result<EnigmaReport> {
    let direct_branch = branch(f, k, lambda, tau)?;
    let reciprocal = PickFunction::negative_reciprocal(f.clone());
    let reciprocal_branch = branch(&reciprocal, k, lambda, tau)?;
    Ok(EnigmaReport {
        member: direct_branch.bounded || reciprocal_branch.bounded,
        direct_branch,
        reciprocal_branch,
    })
}

/// Normalizing gauge for a cryptospectral point with limit 0:
/// `𝔨(t) = (1/2t) ∫_{−t}^{t} Im f(τ + x + it) dx` on `t = 2^{-k}`.
pub fn crypto_gauge(f: &PickFunction, tau: f64) -> Result<Gauge> {
    let v = classify_point(f, tau)?;
    let limit_ok = matches!(v.nt_limit, Some(l) if l.norm() <= 1e-6);
    if v.class != SpectralClass::Crypto || !limit_ok {
        return Err(NevError::Classification(format!(
            "crypto gauge needs a cryptospectral point with limit 0; τ = {tau} is {:?} with limit {:?}",
            v.class, v.nt_limit
        )));
    }
    let (one, id) = (Gauge::constant(1.0), Gauge::identity());
    let pts = (1..=30)
        .into_par_iter()
        .map(|k| {
            let t = 2f64.powi(-k);
            Ok((t, crate::quotients::averaged_quotient_direct(f, &one, &id, tau, t)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Gauge::Table(crate::gauges::Table::new(pts)?))
}

/// `F(t) = λ(t)·𝔨(λ(t))/t`.
pub fn enigma_fortune_gauge(k: &Gauge, lambda: &Gauge) -> Result<Gauge> {
    let lc = asymptotic_class(lambda, &Gauge::identity()).class;
    if !lc.is_big_omega() {
        return Err(NevError::precondition(format!("λ must be Ω(t); λ = {lambda} is {lc:?}")));
    }
    let kc = asymptotic_class(k, &Gauge::constant(1.0)).class;
    if kc != crate::gauges::AsymptoticClass::LittleO {
        return Err(NevError::precondition(format!("𝔨 must be o(1); 𝔨 = {k} is {kc:?}")));
    }
    let kl = compose(k, lambda)?;
    Ok(product(&product(lambda, &kl), &Gauge::power(1.0, -1.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConformalReport {
    pub hypotheses: Vec<(String, bool)>,
    pub f_member: bool,
    pub mapped_member: bool,
    pub agreement: bool,
}

/// Hypotheses under which enigma membership is invariant under Möbius maps.
pub fn conformal_hypotheses(k: &Gauge, lambda: &Gauge, gamma: &Gauge) -> Result<Vec<(String, bool)>> {
    let t = Gauge::identity();
    let g_ot = asymptotic_class(gamma, &t).class.is_big_o() && gamma.is_nondecreasing();
    let l_ot = asymptotic_class(lambda, &t).class.is_big_o();
    let l_og = asymptotic_class(lambda, gamma).class.is_big_omega();
    let augury = is_augury_sweep(&compose(k, lambda)?, gamma)?.holds;
    Ok(vec![
        ("γ is O(t) and monotone".into(), g_ot),
        ("λ is O(t) and Ω(γ)".into(), l_ot && l_og),
        ("𝔨∘λ is a γ-augury".into(), augury),
    ])
}

pub fn conformal_invariance_check(
    f: &PickFunction,
    map: MobiusMap,
    k: &Gauge,
    lambda: &Gauge,
    gamma: &Gauge,
    tau: f64,
) -> Result<ConformalReport> {
    let hypotheses = conformal_hypotheses(k, lambda, gamma)?;
    if let Some((name, _)) = hypotheses.iter().find(|(_, ok)| !ok) {
        return Err(NevError::precondition(format!("hypothesis fails: {name}")));
    }
    let v = classify_point(f, tau)?;
    let singular = match v.nt_limit {
        Some(l) => (map.c * l + map.d).norm() <= 1e-9 * (map.c.abs() + map.d.abs()),
        None if v.class == SpectralClass::Julia => map.c == 0.0,
        None => false,
    };
    if singular {
        return Err(NevError::Singularity(format!("Möbius map sends the boundary value of f at {tau} to ∞")));
    }
    let f_member = enigma_member(f, k, lambda, tau)?.member;
    let mapped_member = enigma_member(&mobius_compose(map, f), k, lambda, tau)?.member;
    Ok(ConformalReport {
        hypotheses,
        f_member,
        mapped_member,
        agreement: f_member == mapped_member,
    })
}

// -------------------------------------------------------------- horocycles

/// `(x, y)` offsets filling `{|x| < 1/β, βγ(α|x|) ≤ y, x² + y² ≤ 1/β²}`.
pub fn horocyclic_net(gamma: &Gauge, alpha: f64, beta: f64, n: usize, seed: u64) -> Vec<Complex64> {
    let r = 1.0 / beta;
    let mut out = Vec::with_capacity(n);
    let mut i = 0u64;
    while out.len() < n && i < 50 * n as u64 {
        let (u, v) = halton2(i, seed);
        i += 1;
        let x = (2.0 * u - 1.0) * r;
        let lo = beta * gamma.eval(alpha * x.abs());
        let hi = (r * r - x * x).max(0.0).sqrt();
        if !(lo < hi) {
            continue;
        }
        // denser near the lower boundary, where the region is thinnest
        let y = lo + (hi - lo) * v * v;
        if y > 0.0 {
            out.push(Complex64::new(x, y));
        }
    }
    out
}

fn require_order_t(gamma: &Gauge) -> Result<()> {
    let cls = asymptotic_class(gamma, &Gauge::identity()).class;
    if !cls.is_big_o() {
        return Err(NevError::precondition(format!("γ must be O(t); γ = {gamma} is {cls:?}")));
    }
    require_monotone(gamma, "γ")
}

/// `sup |f(z) − f(τ)|` over the horocyclic net for each β.
pub fn horocyclic_profile(
    f: &PickFunction,
    gamma: &Gauge,
    alpha: f64,
    tau: f64,
    betas: &[f64],
    net_size: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    require_order_t(gamma)?;
    if betas.windows(2).any(|w| !(w[1] > w[0])) || betas.iter().any(|&b| !(b > 0.0)) {
        return Err(NevError::arg("β grid must be positive and increasing"));
    }
    let v = classify_point(f, tau)?;
    let f_tau = match v.nt_limit {
        Some(l) if v.class != SpectralClass::Ethereal => l,
        _ => {
            return Err(NevError::Classification(format!(
                "no finite boundary value at {tau}: {:?} ({})",
                v.class, v.diagnostics
            )))
        }
    };
    betas
        .par_iter()
        .map(|&beta| {
            let net = horocyclic_net(gamma, alpha, beta, net_size.max(2000), seed);
            let mut sup = 0.0f64;
            for z in net {
                sup = sup.max((f.evaluate(z + tau)? - f_tau).norm());
            }
            Ok((beta, sup))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelBound {
    pub observed_sup: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Brute-force `sup |γ(t)/(t − z) − γ(t)/t|` for `t ∈ (0, 1]` and `z` on
/// `x + iβγ(2|x|)`, `|z| ≤ 1/β`, against `max{2C, (1 + βC)/β}`.
pub fn kernel_extreme_bound_check(gamma: &Gauge, beta: f64, c: f64, net_size: usize) -> Result<KernelBound> {
    require_monotone(gamma, "γ")?;
    if !(beta > 0.0 && c > 0.0) {
        return Err(NevError::arg("β and C must be positive"));
    }
    let order_ok = match gamma {
        Gauge::Power(p) => {
            let tail = asymptotic_class(gamma, &Gauge::identity()).class.is_big_o();
            // sup_{(0,1]} c·t^{p−1}·log-factor ≤ C, checked on a fine grid
            tail && (0..=2000).all(|k| {
                let t = 10f64.powf(-12.0 * k as f64 / 2000.0);
                p.eval(t) <= c * t * (1.0 + 1e-12)
            })
        }
        Gauge::Table(tb) => tb.points().iter().filter(|p| p.0 <= 1.0).all(|&(t, v)| v <= c * t * (1.0 + 1e-12)),
        other => (0..=2000).all(|k| {
            let t = 10f64.powf(-12.0 * k as f64 / 2000.0);
            other.eval(t) <= c * t * (1.0 + 1e-12)
        }),
    };
    if !order_ok {
        return Err(NevError::precondition(format!("γ = {gamma} is not bounded by C·t with C = {c}")));
    }
    let side = ((net_size as f64).sqrt().ceil() as usize).max(2);
    let r = 1.0 / beta;
    let ts: Vec<f64> = (0..side).map(|i| 10f64.powf(-8.0 * i as f64 / (side - 1) as f64)).collect();
    let mut xs = Vec::with_capacity(side);
    for i in 0..side / 2 {
        let x = r * 10f64.powf(-8.0 * i as f64 / (side / 2).max(2) as f64);
        xs.push(x);
        xs.push(-x);
    }
    let observed = xs
        .par_iter()
        .map(|&x| {
            let z = Complex64::new(x, beta * gamma.eval(2.0 * x.abs()));
            if z.norm() > r {
                return 0.0;
            }
            ts.iter()
                .map(|&t| {
                    let g = gamma.eval(t);
                    (g / (Complex64::new(t, 0.0) - z) - g / t).norm()
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    let bound = (2.0 * c).max((1.0 + beta * c) / beta);
    Ok(KernelBound {
        observed_sup: observed,
        bound,
        holds: observed <= bound * (1.0 + 1e-9),
    })
}
