//! Verdicts on the local size of a measure near a boundary point:
//! sub-density, fortune and γ-regularity, plus the round trip between the
//! last two through an explicitly constructed augury.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Estimate, NevError, Result};
use crate::gauges::{
    asymptotic_class, decompose_fortune, decompose_fortune_tabulated, is_augury_sweep, product, Gauge, Table,
};
use crate::measures::{radial_integral, Measure};
use crate::pick::PickFunction;
use crate::quotients::{default_grid, quotient_series, CcLim, Method};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    SubDensity,
    Fortunate,
    GammaRegular,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepEntry {
    pub c: f64,
    pub holds: bool,
    pub statistic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityVerdict {
    pub kind: VerdictKind,
    pub holds: bool,
    pub c_used: f64,
    /// Supremum of the tested quotient, or the integral, for `c_used`.
    pub statistic: f64,
    pub heuristic: bool,
    pub sweep: Vec<SweepEntry>,
    pub detail: String,
}

fn pick_entry(kind: VerdictKind, sweep: Vec<SweepEntry>, detail: String) -> RegularityVerdict {
    let chosen = sweep
        .iter()
        .find(|e| e.holds)
        .or_else(|| sweep.last())
        .cloned()
        .expect("nonempty sweep");
    RegularityVerdict {
        kind,
        holds: chosen.holds,
        c_used: chosen.c,
        statistic: chosen.statistic,
        heuristic: true,
        sweep,
        detail,
    }
}

fn check_sweep(c_sweep: &[f64]) -> Result<()> {
    if c_sweep.is_empty() || c_sweep.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
        return Err(NevError::arg("C sweep must be a nonempty list of positive reals"));
    }
    Ok(())
}

/// Is `μ(τ−ε, τ+ε)/(F(Cε)·ε)` bounded as ε → 0 for some C in the sweep?
pub fn sub_density_verdict(mu: &Measure, fortune: &Gauge, tau: f64, c_sweep: &[f64]) -> Result<RegularityVerdict> {
    check_sweep(c_sweep)?;
    let grid = default_grid();
    let masses = grid.iter().map(|&e| mu.window_mass(tau, e)).collect::<Result<Vec<f64>>>()?;
    let mut sweep = Vec::new();
    for &c in c_sweep {
        let values: Vec<f64> = grid
            .iter()
            .zip(&masses)
            .map(|(&e, &m)| {
                let fv = fortune.eval(c * e);
                if fv > 0.0 {
                    m / (fv * e)
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        let lim = crate::quotients::cc_lim_estimate(&grid, &values)?;
        let sup = values.iter().fold(0.0f64, |a, &v| a.max(v));
        sweep.push(SweepEntry {
            c,
            holds: lim.bounded,
            statistic: sup,
        });
    }
    Ok(pick_entry(
        VerdictKind::SubDensity,
        sweep,
        format!("sup over ε ∈ [2^-20, 2^-3] of μ(τ±ε)/(F(Cε)ε) for F = {fortune}"),
    ))
}

/// Fortune report with the decomposition and series behind the verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FortuneDetail {
    pub verdict: RegularityVerdict,
    pub k: Gauge,
    pub lambda: Gauge,
    pub tail_condition: bool,
    pub series: Vec<(f64, f64)>,
    pub cc_lim: CcLim,
}

/// `f` is F-fortunate at τ: `F = 𝔨 ∘ λ`, `λ(ε)/(F(ε)ε²)` bounded and the
/// averaged quotient for `(𝔨, λ)` bounded as ε → 0. Power-law F is split
/// symbolically, tabulated F on its sample grid.
pub fn fortunate_detail(f: &PickFunction, fortune: &Gauge, tau: f64) -> Result<FortuneDetail> {
    let grid = default_grid();
    let (k, lambda, tail_condition) = match fortune {
        Gauge::Power(_) => {
            let (k, lambda) = decompose_fortune(fortune)?;
            let ft2 = product(fortune, &Gauge::power(1.0, 2.0));
            let ok = asymptotic_class(&lambda, &ft2).class.is_big_o();
            (k, lambda, ok)
        }
        Gauge::Table(tb) => {
            let (k, lambda) = decompose_fortune_tabulated(tb)?;
            // λ ≤ F t² holds sample by sample.
            let ok = grid.iter().all(|&e| lambda.eval(e) <= fortune.eval(e) * e * e * (1.0 + 1e-12));
            (k, lambda, ok)
        }
        _ => {
            return Err(NevError::Unsupported(format!(
                "fortune decomposition needs a power law or a table, got {fortune}"
            )))
        }
    };
    let method = if f.as_triple().is_some() { Method::Kernel } else { Method::Direct };
    let series = quotient_series(f, &k, &lambda, tau, &grid, method)?;
    let lim = series.cc_lim()?;
    let holds = tail_condition && lim.bounded;
    let verdict = RegularityVerdict {
        kind: VerdictKind::Fortunate,
        holds,
        c_used: 1.0,
        statistic: lim.limsup.as_f64(),
        heuristic: true,
        sweep: vec![SweepEntry {
            c: 1.0,
            holds,
            statistic: lim.limsup.as_f64(),
        }],
        detail: format!(
            "𝔨 = {k}, λ = {lambda}; tail condition {}; series slope {:.4}",
            if tail_condition { "holds" } else { "fails" },
            lim.slope
        ),
    };
    Ok(FortuneDetail {
        verdict,
        k,
        lambda,
        tail_condition,
        series: series.grid.iter().copied().zip(series.values.iter().copied()).collect(),
        cc_lim: lim,
    })
}

pub fn fortunate_verdict(f: &PickFunction, fortune: &Gauge, tau: f64) -> Result<RegularityVerdict> {
    Ok(fortunate_detail(f, fortune, tau)?.verdict)
}

/// Is `1/γ(C|t − τ|)` μ-integrable on `[τ−1, τ+1]` for some C?
pub fn gamma_regular_verdict(mu: &Measure, gamma: &Gauge, tau: f64, c_sweep: &[f64]) -> Result<RegularityVerdict> {
    check_sweep(c_sweep)?;
    let bounded = asymptotic_class(gamma, &Gauge::constant(1.0)).class;
    if !bounded.is_big_o() {
        return Err(NevError::precondition(format!("γ-regularity needs γ = O(1); γ = {gamma} is {bounded:?}")));
    }
    if !gamma.is_nondecreasing() {
        return Err(NevError::arg(format!("γ = {gamma} is not monotone increasing")));
    }
    let g0 = gamma.limit_at_zero();
    let at_zero = (g0 > 0.0 && g0.is_finite()).then(|| 1.0 / g0);
    let sweep = c_sweep
        .par_iter()
        .map(|&c| {
            let r = radial_integral(mu, tau, 1.0, |s| 1.0 / gamma.eval(c * s), at_zero)?;
            Ok(SweepEntry {
                c,
                holds: r.estimate.is_finite(),
                statistic: r.estimate.as_f64(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(pick_entry(
        VerdictKind::GammaRegular,
        sweep,
        format!("∫ 1/γ(C|t−τ|) dμ over |t−τ| ≤ 1 by dyadic annuli, γ = {gamma}"),
    ))
}

/// Round trip between γ-regularity and the existence of a γ-augury making
/// f fortunate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegfortReport {
    pub regular: RegularityVerdict,
    /// Constructed fortune `F(t) = μ(τ−t, τ+t)/t`, floored at `t²`.
    pub constructed_is_augury: bool,
    pub constructed_fortunate: bool,
    /// `is_augury ∧ fortunate` for the constructed F.
    pub forward: bool,
    /// Same test for a caller-supplied augury, if any.
    pub backward: Option<bool>,
    pub agreement: bool,
}

/// Tabulated `t ↦ max{μ(τ−t, τ+t)/t, t²}` on `2^{-k}`, `k = 0..=45`.
pub fn window_density_fortune(mu: &Measure, tau: f64) -> Result<Gauge> {
    let table = Table::dyadic(
        |t| {
            let m = mu.window_mass(tau, t).unwrap_or(0.0);
            (m / t).max(t * t)
        },
        45,
        1,
    )?;
    Ok(Gauge::Table(table))
}

pub fn regfort_equivalence_check(
    f: &PickFunction,
    gamma: &Gauge,
    tau: f64,
    augury: Option<&Gauge>,
    c_sweep: &[f64],
) -> Result<RegfortReport> {
    let (_, _, mu) = f
        .as_triple()
        .ok_or_else(|| NevError::Unsupported("regularity round trip needs an explicit (a, b, μ)".into()))?;
    if !gamma.is_symbolic() {
        return Err(NevError::precondition("regularity round trip needs a power-law γ"));
    }
    let regular = gamma_regular_verdict(&mu, gamma, tau, c_sweep)?;
    let fortune = window_density_fortune(&mu, tau)?;
    let constructed_is_augury = is_augury_sweep(&fortune, gamma)?.holds;
    let constructed_fortunate = fortunate_verdict(f, &fortune, tau)?.holds;
    let forward = constructed_is_augury && constructed_fortunate;
    let backward = match augury {
        Some(a) => Some(is_augury_sweep(a, gamma)?.holds && fortunate_verdict(f, a, tau)?.holds),
        None => None,
    };
    let agreement = forward == regular.holds && backward.map_or(true, |b| !b || regular.holds);
    Ok(RegfortReport {
        regular,
        constructed_is_augury,
        constructed_fortunate,
        forward,
        backward,
        agreement,
    })
}

impl RegularityVerdict {
    pub fn statistic_estimate(&self) -> Estimate {
        if self.statistic.abs() >= crate::error::DIVERGENCE_SENTINEL {
            Estimate::divergent(self.statistic.signum() as i8, "divergent statistic")
        } else {
            Estimate::finite(self.statistic)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauges::C_SWEEP;
    use proptest::prelude::*;

    fn triple(mu: Measure) -> PickFunction {
        PickFunction::triple(0.0, 0.0, mu).unwrap()
    }

    #[test]
    fn sub_density_examples() {
        let one = Gauge::constant(1.0);
        let d = Measure::dirac(0.0, 1.0).unwrap();
        assert!(!sub_density_verdict(&d, &one, 0.0, &C_SWEEP).unwrap().holds);
        let leb = Measure::uniform(-1.0, 1.0).unwrap();
        let v = sub_density_verdict(&leb, &one, 0.0, &C_SWEEP).unwrap();
        assert!(v.holds && (v.statistic - 2.0).abs() < 1e-12);
        let dim = 2f64.ln() / 3f64.ln();
        let v = sub_density_verdict(&Measure::cantor(), &Gauge::power(1.0, dim - 1.0), 0.0, &C_SWEEP).unwrap();
        assert!(v.holds);
    }

    #[test]
    fn fortunate_examples() {
        let one = Gauge::constant(1.0);
        let d = fortunate_detail(&triple(Measure::uniform(-1.0, 1.0).unwrap()), &one, 0.0).unwrap();
        assert!(d.verdict.holds);
        assert_eq!(d.lambda, Gauge::power(1.0, 2.0));
        assert!(!fortunate_verdict(&PickFunction::neg_inverse(), &one, 0.0).unwrap().holds);
        for fortune in [one, Gauge::power(1.0, -0.5), Gauge::power(2.0, 1.0)] {
            assert!(fortunate_verdict(&PickFunction::identity(), &fortune, 0.0).unwrap().holds);
        }
        let lg = Gauge::power_log(1.0, 1.0, 1.0).unwrap();
        assert!(matches!(fortunate_verdict(&PickFunction::identity(), &lg, 0.0), Err(NevError::Unsupported(_))));
    }

    #[test]
    fn gamma_regular_examples() {
        let d = Measure::dirac(0.0, 1.0).unwrap();
        assert!(!gamma_regular_verdict(&d, &Gauge::power(1.0, 0.5), 0.0, &C_SWEEP).unwrap().holds);
        let abs = Measure::power_density(0.0, 1.0, 1.0, 1.0).unwrap();
        let v = gamma_regular_verdict(&abs, &Gauge::power(1.0, 1.5), 0.0, &C_SWEEP).unwrap();
        // ∫_{-1}^{1} |t|·|Ct|^{-1.5} dt = 4·C^{-1.5} at C = 0.5
        assert!(v.holds && (v.statistic - 4.0 * 0.5f64.powf(-1.5)).abs() < 1e-6);
        assert!(!gamma_regular_verdict(&abs, &Gauge::power(1.0, 2.0), 0.0, &C_SWEEP).unwrap().holds);
        let r = gamma_regular_verdict(&abs, &Gauge::power(1.0, -0.5), 0.0, &C_SWEEP);
        assert!(matches!(r, Err(NevError::Precondition(_))));
    }

    #[test]
    fn regfort_examples() {
        let f = triple(Measure::power_density(0.0, 1.0, 1.0, 0.5).unwrap());
        let r = regfort_equivalence_check(&f, &Gauge::power(1.0, 1.2), 0.0, None, &C_SWEEP).unwrap();
        assert!(r.regular.holds && r.forward && r.agreement);
        let r = regfort_equivalence_check(&PickFunction::neg_inverse(), &Gauge::power(1.0, 0.5), 0.0, None, &C_SWEEP)
            .unwrap();
        assert!(!r.regular.holds && !r.forward && r.agreement);
        let dim = 2f64.ln() / 3f64.ln();
        let r = regfort_equivalence_check(&triple(Measure::cantor()), &Gauge::power(1.0, 0.8 * dim), 0.0, None, &C_SWEEP)
            .unwrap();
        assert!(r.regular.holds && r.forward && r.agreement, "{r:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn gamma_regular_monotone_in_gamma(p in 0.0f64..1.5, eta in 0.2f64..2.5, d in 0.0f64..1.0) {
            // t^{η} ≥ t^{η+d} near 0: the larger gauge cannot lose regularity
            let mu = Measure::power_density(0.0, 1.0, 1.0, p).unwrap();
            let small = gamma_regular_verdict(&mu, &Gauge::power(1.0, eta + d), 0.0, &[1.0]).unwrap().holds;
            let large = gamma_regular_verdict(&mu, &Gauge::power(1.0, eta), 0.0, &[1.0]).unwrap().holds;
            let margin = (p - eta + 1.0).abs().min((p - eta - d + 1.0).abs());
            prop_assume!(margin > 0.1);
            prop_assert!(!small || large);
        }

        #[test]
        fn sub_density_monotone_in_fortune(p in -0.5f64..1.5, s in -1.0f64..1.0, d in 0.0f64..1.0) {
            // t^{s−d} ≥ t^{s} near 0
            let mu = Measure::power_density(0.0, 1.0, 1.0, p).unwrap();
            prop_assume!((p - s).abs() > 0.1 && (p - s + d).abs() > 0.1);
            let small = sub_density_verdict(&mu, &Gauge::power(1.0, s), 0.0, &C_SWEEP).unwrap().holds;
            let large = sub_density_verdict(&mu, &Gauge::power(1.0, s - d), 0.0, &C_SWEEP).unwrap().holds;
            prop_assert!(!small || large);
        }
    }
}
