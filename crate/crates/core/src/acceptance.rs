//! Acceptance suites shared by `nevlab verify` and the `acceptance` test
//! target. Each suite returns one [`Criterion`] with a pass flag and a
//! short detail line; tolerances are the constants below.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{NevError, Result};
use crate::foliation::{conformal_invariance_check, horocyclic_profile, kernel_extreme_bound_check};
use crate::gauges::{Gauge, Table, C_SWEEP};
use crate::measures::{layer_cake_residual, Measure};
use crate::netgen::upper_half_plane_sample;
use crate::pick::{aronszajn_krein, MobiusMap, PickFunction};
use crate::quotients::{
    augur_bounds, averaged_quotient_direct, averaged_quotient_kernel, default_grid, fit_augur_constants,
};
use crate::regularity::{fortunate_verdict, gamma_regular_verdict, regfort_equivalence_check, sub_density_verdict};

pub const KERNEL_AGREEMENT_REL: f64 = 1e-6;
pub const KERNEL_AGREEMENT_SECONDS: f64 = 60.0;
pub const ANCHOR_REL: f64 = 1e-10;
pub const CANTOR_SLOPE_TOL: f64 = 0.02;
pub const AK_REL: f64 = 1e-9;
pub const HOROCYCLE_FINAL: f64 = 0.01;
pub const LAYER_CAKE_TOL: f64 = 1e-6;
/// Relative slack for the augur inequalities, covering quadrature error.
pub const AUGUR_SLACK: f64 = 1e-9;

pub const SUITES: [&str; 10] = [
    "kernel-agreement",
    "closed-form-anchor",
    "augur-sandwich",
    "fortune-density",
    "regfort",
    "cantor-exponent",
    "aronszajn-krein",
    "conformal-invariance",
    "horocyclic",
    "layer-cake",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub id: usize,
    pub suite: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for Criterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {:>2} {:<21} {:>7.2}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.suite,
            self.seconds,
            self.detail
        )
    }
}

/// Measures used across the suites, all evaluated at τ = 0.
pub fn corpus() -> Vec<(&'static str, Measure)> {
    vec![
        ("atom", Measure::dirac(0.0, 1.0).unwrap()),
        ("two-atom", two_atom()),
        ("lebesgue[-1,1]", Measure::uniform(-1.0, 1.0).unwrap()),
        ("|t|^0.5", Measure::power_density(0.0, 1.0, 1.0, 0.5).unwrap()),
        ("cantor", Measure::cantor()),
        ("mixed", mixed()),
    ]
}

fn two_atom() -> Measure {
    Measure::atoms(vec![(-0.75, 0.5), (0.5, 0.5)]).unwrap()
}

/// Atom, absolutely continuous and singular continuous parts together.
fn mixed() -> Measure {
    Measure::dirac(0.25, 0.5)
        .unwrap()
        .plus(Measure::uniform(-1.0, 1.0).unwrap())
        .plus(Measure::cantor())
        .with_name("mixed")
}

fn triple(mu: Measure) -> PickFunction {
    PickFunction::triple(0.0, 0.0, mu).expect("corpus measures are valid")
}

fn gauge_pairs() -> Vec<(&'static str, Gauge, Gauge)> {
    vec![
        ("(1,t²)", Gauge::constant(1.0), Gauge::power(1.0, 2.0)),
        ("(id,id)", Gauge::identity(), Gauge::identity()),
        ("(t^½,t)", Gauge::power(1.0, 0.5), Gauge::identity()),
    ]
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn timed(id: usize, suite: &'static str, body: impl FnOnce() -> Result<(bool, String)>) -> Criterion {
    let start = Instant::now();
    let (passed, detail) = match body() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    Criterion {
        id,
        suite,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn kernel_agreement() -> Criterion {
    timed(1, "kernel-agreement", || {
        let start = Instant::now();
        let grid = default_grid();
        let mut cases = Vec::new();
        for (name, mu) in corpus() {
            let f = triple(mu);
            for (gname, k, l) in gauge_pairs() {
                for &eps in &grid {
                    cases.push((name, f.clone(), gname, k.clone(), l.clone(), eps));
                }
            }
        }
        let worst = cases
            .par_iter()
            .map(|(name, f, gname, k, l, eps)| {
                let d = averaged_quotient_direct(f, k, l, 0.0, *eps)?;
                let q = averaged_quotient_kernel(f, k, l, 0.0, *eps)?;
                Ok((rel(d, q), format!("{name} {gname} ε={eps:.3e}")))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold((0.0, String::new()), |acc, x| if x.0 > acc.0 { x } else { acc });
        let secs = start.elapsed().as_secs_f64();
        Ok((
            worst.0 <= KERNEL_AGREEMENT_REL && secs < KERNEL_AGREEMENT_SECONDS,
            format!("{} cases, worst rel {:.2e} at {}, {secs:.1}s", cases.len(), worst.0, worst.1),
        ))
    })
}

pub fn closed_form_anchor() -> Criterion {
    timed(2, "closed-form-anchor", || {
        let f = PickFunction::neg_inverse();
        let (one, id) = (Gauge::constant(1.0), Gauge::identity());
        let mut worst = 0.0f64;
        for eps in default_grid() {
            // (1/2ε)·[arctan(x/ε)] over [−ε, ε]
            let want = (1.0f64.atan() - (-1.0f64).atan()) / (2.0 * eps);
            worst = worst.max(rel(averaged_quotient_direct(&f, &one, &id, 0.0, eps)?, want));
            worst = worst.max(rel(averaged_quotient_kernel(&f, &one, &id, 0.0, eps)?, want));
        }
        Ok((worst <= ANCHOR_REL, format!("worst rel {worst:.2e} (direct and kernel)")))
    })
}

pub fn augur_sandwich() -> Criterion {
    timed(3, "augur-sandwich", || {
        let eps0 = 0.125;
        let one = Gauge::constant(1.0);
        let lambdas = [("t", Gauge::identity()), ("t²", Gauge::power(1.0, 2.0))];
        let grid: Vec<f64> = default_grid().into_iter().filter(|&e| e < eps0).collect();
        let mut checked = 0;
        let mut violations = Vec::new();
        for (name, mu) in corpus() {
            let f = triple(mu.clone());
            for (lname, l) in &lambdas {
                let c = fit_augur_constants(&mu, 0.0, l, 0.0, eps0)?;
                let rows = grid
                    .par_iter()
                    .map(|&eps| {
                        let a = averaged_quotient_kernel(&f, &one, l, 0.0, eps)?;
                        Ok((eps, a, augur_bounds(&mu, 0.0, &one, l, 0.0, eps, c)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                for (eps, a, b) in rows {
                    checked += 1;
                    let ok = b.lower <= a * (1.0 + AUGUR_SLACK) && a <= b.upper() * (1.0 + AUGUR_SLACK);
                    if !ok {
                        violations.push(format!(
                            "{name} λ={lname} ε={eps:.2e}: {:.3e} ≤ {a:.3e} ≤ {:.3e}",
                            b.lower,
                            b.upper()
                        ));
                    }
                }
            }
        }
        Ok((
            violations.is_empty(),
            format!("{checked} checks, {} violations {}", violations.len(), violations.join("; ")),
        ))
    })
}

/// Power densities `|t|^p` on [−1, 1] against fortunes `t^s`.
pub fn fortune_density() -> Criterion {
    timed(4, "fortune-density", || {
        let mut cases = Vec::new();
        for p in [0.0, 0.5, 1.0] {
            for s in [-0.5, 0.25, 0.75, 1.5] {
                cases.push((p, s));
            }
        }
        let rows = cases
            .par_iter()
            .map(|&(p, s)| {
                let mu = Measure::power_density(0.0, 1.0, 1.0, p)?;
                let fortune = Gauge::power(1.0, s);
                let a = fortunate_verdict(&triple(mu.clone()), &fortune, 0.0)?.holds;
                let b = sub_density_verdict(&mu, &fortune, 0.0, &C_SWEEP)?.holds;
                Ok((p, s, a, b))
            })
            .collect::<Result<Vec<_>>>()?;
        let bad: Vec<String> = rows
            .iter()
            .filter(|r| r.2 != r.3)
            .map(|r| format!("p={} s={}: fortunate {} vs sub-density {}", r.0, r.1, r.2, r.3))
            .collect();
        Ok((bad.is_empty(), format!("{}/{} agree {}", rows.len() - bad.len(), rows.len(), bad.join("; "))))
    })
}

pub fn regfort() -> Criterion {
    timed(5, "regfort", || {
        let mut cases = Vec::new();
        for p in [0.0, 0.5, 1.0] {
            for eta in [0.5, 1.2, 2.2] {
                cases.push((p, eta));
            }
        }
        let rows = cases
            .par_iter()
            .map(|&(p, eta)| {
                let f = triple(Measure::power_density(0.0, 1.0, 1.0, p)?);
                let r = regfort_equivalence_check(&f, &Gauge::power(1.0, eta), 0.0, None, &C_SWEEP)?;
                let expect = p - eta > -1.0;
                let ok = r.regular.holds == expect && r.constructed_is_augury == r.regular.holds;
                Ok((p, eta, ok, r.regular.holds, r.constructed_is_augury))
            })
            .collect::<Result<Vec<_>>>()?;
        let bad: Vec<String> = rows
            .iter()
            .filter(|r| !r.2)
            .map(|r| format!("p={} η={}: regular {} augury {}", r.0, r.1, r.3, r.4))
            .collect();
        Ok((bad.is_empty(), format!("{}/9 match {}", 9 - bad.len(), bad.join("; "))))
    })
}

pub fn cantor_exponent() -> Criterion {
    timed(6, "cantor-exponent", || {
        let mu = Measure::cantor();
        let pts = (1..=10)
            .map(|k| {
                let eps = 3f64.powi(-k);
                Ok((eps.ln(), mu.window_mass(0.0, eps)?.ln()))
            })
            .collect::<Result<Vec<_>>>()?;
        let slope = crate::gauges::fit_slope(&pts);
        let want = 2f64.ln() / 3f64.ln();
        Ok(((slope - want).abs() <= CANTOR_SLOPE_TOL, format!("slope {slope:.6} vs {want:.6}")))
    })
}

fn jacobi_matrix(n: usize) -> (Vec<f64>, Vec<f64>, DMatrix<f64>) {
    let diag: Vec<f64> = (0..n).map(|k| (0.3 * k as f64).sin()).collect();
    let off: Vec<f64> = (0..n - 1).map(|k| 1.0 + 0.2 * (0.7 * k as f64).cos()).collect();
    let mut m = DMatrix::from_diagonal(&DVector::from_vec(diag.clone()));
    for (i, &o) in off.iter().enumerate() {
        m[(i, i + 1)] = o;
        m[(i + 1, i)] = o;
    }
    (diag, off, m)
}

/// `⟨e₁, (A − z)⁻¹ e₁⟩` by a complex LU solve.
fn resolvent_e1(a: &DMatrix<f64>, z: Complex64) -> Result<Complex64> {
    let n = a.nrows();
    let shifted = a.map(|v| Complex64::new(v, 0.0)) - DMatrix::<Complex64>::identity(n, n) * z;
    let mut e1 = DVector::<Complex64>::zeros(n);
    e1[0] = Complex64::new(1.0, 0.0);
    let x = shifted
        .lu()
        .solve(&e1)
        .ok_or_else(|| NevError::Singularity(format!("A − z singular at {z}")))?;
    Ok(x[0])
}

pub fn aronszajn_krein_consistency() -> Criterion {
    timed(7, "aronszajn-krein", || {
        let (diag, off, a) = jacobi_matrix(50);
        let f = PickFunction::jacobi(&diag, &off)?;
        let zs = upper_half_plane_sample(100, 0);
        let mut worst = 0.0f64;
        for alpha in [-1.0, 0.3, 0.7, 2.0] {
            let g = aronszajn_krein(&f, alpha);
            let mut a_alpha = a.clone();
            a_alpha[(0, 0)] += alpha;
            for &z in &zs {
                let want = resolvent_e1(&a_alpha, z)?;
                worst = worst.max((g.evaluate(z)? - want).norm() / want.norm());
            }
        }
        Ok((worst <= AK_REL, format!("400 samples, worst rel {worst:.2e}")))
    })
}

pub fn conformal_invariance() -> Criterion {
    timed(8, "conformal-invariance", || {
        let fs = vec![
            ("z", PickFunction::identity()),
            ("-1/z", PickFunction::neg_inverse()),
            ("lebesgue[-1,1]", triple(Measure::uniform(-1.0, 1.0)?)),
            ("|t|^0.5", triple(Measure::power_density(0.0, 1.0, 1.0, 0.5)?)),
        ];
        let maps = [
            MobiusMap::new(1.0, 0.0, 1.0, 1.0)?,
            MobiusMap::new(2.0, 1.0, 1.0, 1.0)?,
            MobiusMap::new(1.0, -1.0, 1.0, 2.0)?,
        ];
        let (g, l, k) = (Gauge::power(1.0, 1.5), Gauge::identity(), Gauge::power(1.0, 0.75));
        let mut cases = Vec::new();
        for (name, f) in &fs {
            for m in maps {
                cases.push((*name, f, m));
            }
        }
        let rows = cases
            .par_iter()
            .map(|(name, f, m)| {
                let r = conformal_invariance_check(f, *m, &k, &l, &g, 0.0)?;
                Ok((format!("{name} ∘ ({},{},{},{})", m.a, m.b, m.c, m.d), r))
            })
            .collect::<Result<Vec<_>>>()?;
        let bad: Vec<String> = rows
            .iter()
            .filter(|(_, r)| !r.agreement)
            .map(|(n, r)| format!("{n}: {} vs {}", r.f_member, r.mapped_member))
            .collect();
        let members = rows.iter().filter(|(_, r)| r.f_member).count();
        Ok((
            bad.is_empty(),
            format!("{}/12 agree ({members} member cases) {}", 12 - bad.len(), bad.join("; ")),
        ))
    })
}

/// Non-increasing over the second half of the profile, up to rounding.
fn eventually_nonincreasing(prof: &[(f64, f64)]) -> bool {
    prof[prof.len() / 2..].windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-9))
}

pub fn horocyclic() -> Criterion {
    timed(9, "horocyclic", || {
        let members = vec![
            ("|t|^1.5", Measure::power_density(0.0, 1.0, 1.0, 1.5)?, Gauge::power(1.0, 1.2), 0.0),
            ("two-atom", two_atom(), Gauge::power(1.0, 1.5), 0.0),
            ("cantor", Measure::cantor(), Gauge::power(1.0, 2.0), -0.5),
        ];
        let betas: Vec<f64> = (1..=10).map(|k| 2f64.powi(k)).collect();
        let mut notes = Vec::new();
        let mut ok = true;
        for (name, mu, g, tau) in members {
            let regular = gamma_regular_verdict(&mu, &g, tau, &C_SWEEP)?.holds;
            let prof = horocyclic_profile(&triple(mu), &g, 1.0, tau, &betas, 2000, 0)?;
            let last = prof.last().map_or(f64::INFINITY, |p| p.1);
            let pass = regular && eventually_nonincreasing(&prof) && last < HOROCYCLE_FINAL;
            ok &= pass;
            notes.push(format!("{name}: final {last:.2e}{}", if pass { "" } else { " ✗" }));
        }
        let combos = vec![
            (Gauge::identity(), 1.0, 1.0),
            (Gauge::identity(), 4.0, 1.0),
            (Gauge::power(0.5, 1.0), 2.0, 0.5),
            (Gauge::power(1.0, 1.5), 1.0, 1.0),
            (Gauge::power(1.0, 2.0), 8.0, 1.0),
            (Gauge::Table(Table::dyadic(|t| t * t, 40, 4)?), 2.0, 1.0),
        ];
        let mut bound_ok = 0;
        for (g, beta, c) in &combos {
            let r = kernel_extreme_bound_check(g, *beta, *c, 10_000)?;
            if r.holds {
                bound_ok += 1;
            } else {
                notes.push(format!("bound fails for γ={g} β={beta}: {:.3e} > {:.3e}", r.observed_sup, r.bound));
            }
        }
        ok &= bound_ok == combos.len();
        Ok((ok, format!("{}; bound {bound_ok}/{}", notes.join(", "), combos.len())))
    })
}

pub fn layer_cake() -> Criterion {
    timed(10, "layer-cake", || {
        let convergent = vec![
            ("lebesgue, t^½", Measure::lebesgue_line(), Gauge::power(1.0, 0.5)),
            ("δ_½, t", Measure::dirac(0.5, 1.0)?, Gauge::identity()),
            ("|t|^0.5, t^1.2", Measure::power_density(0.0, 1.0, 1.0, 0.5)?, Gauge::power(1.0, 1.2)),
            ("two-atom, t^0.8", two_atom(), Gauge::power(1.0, 0.8)),
            (
                "mixed, t^0.8",
                Measure::dirac(0.5, 0.5)?.plus(Measure::power_density(0.0, 1.0, 1.0, 0.5)?),
                Gauge::power(1.0, 0.8),
            ),
        ];
        let divergent = vec![
            ("δ₀, t^½", Measure::dirac(0.0, 1.0)?, Gauge::power(1.0, 0.5)),
            ("lebesgue, t²", Measure::lebesgue_line(), Gauge::power(1.0, 2.0)),
        ];
        let mut notes = Vec::new();
        let mut ok = true;
        for (name, mu, g) in &convergent {
            let r = layer_cake_residual(mu, g, 0.0)?;
            let (l, res) = (r.lhs.value(), r.residual.value());
            let pass = matches!((l, res), (Some(l), Some(res)) if res.abs() <= LAYER_CAKE_TOL * l.abs().max(1.0));
            ok &= pass;
            notes.push(format!("{name}: {:.1e}", res.unwrap_or(f64::INFINITY)));
        }
        for (name, mu, g) in &divergent {
            let r = layer_cake_residual(mu, g, 0.0)?;
            let pass = !r.lhs.is_finite() && !r.rhs.is_finite();
            ok &= pass;
            notes.push(format!("{name}: {}", if pass { "both divergent" } else { "sentinel mismatch" }));
        }
        Ok((ok, notes.join(", ")))
    })
}

pub fn run_suite(name: &str) -> Result<Vec<Criterion>> {
    let one = |c: fn() -> Criterion| Ok(vec![c()]);
    match name {
        "kernel-agreement" => one(kernel_agreement),
        "closed-form-anchor" => one(closed_form_anchor),
        "augur-sandwich" => one(augur_sandwich),
        "fortune-density" => one(fortune_density),
        "regfort" => one(regfort),
        "cantor-exponent" => one(cantor_exponent),
        "aronszajn-krein" => one(aronszajn_krein_consistency),
        "conformal-invariance" => one(conformal_invariance),
        "horocyclic" => one(horocyclic),
        "layer-cake" => one(layer_cake),
        "all" => SUITES.iter().map(|s| run_suite(s).map(|mut v| v.remove(0))).collect(),
        other => Err(NevError::arg(format!(
            "unknown suite '{other}'; expected one of {} or all",
            SUITES.join(", ")
        ))),
    }
}
