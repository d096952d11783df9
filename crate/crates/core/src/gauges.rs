//! Asymptotic gauges near 0: power laws with a logarithmic factor,
//! monotone-checked sample tables, and their compositions and products.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{NevError, Result};
use crate::quad::{integrate, partition, QuadOptions};

/// The constant sweep used for existential "for some C > 0" clauses.
pub const C_SWEEP: [f64; 4] = [0.5, 1.0, 2.0, 4.0];

const EXP_TOL: f64 = 1e-12;

/// `coeff · t^power · (log 1/t)^log`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    pub coeff: f64,
    pub power: f64,
    pub log: f64,
}

impl PowerLaw {
    pub fn eval(&self, t: f64) -> f64 {
        let base = self.coeff * t.powf(self.power);
        if self.log == 0.0 {
            base
        } else {
            base * (1.0 / t).ln().powf(self.log)
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        if self.log == 0.0 {
            if self.power == 0.0 {
                return 0.0;
            }
            return self.coeff * self.power * t.powf(self.power - 1.0);
        }
        let l = (1.0 / t).ln();
        self.coeff * t.powf(self.power - 1.0) * l.powf(self.log - 1.0) * (self.power * l - self.log)
    }
}

impl fmt::Display for PowerLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}·t^{}", self.coeff, self.power)?;
        if self.log != 0.0 {
            write!(f, "·log(1/t)^{}", self.log)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    Constant,
    None,
}

/// Sample table on `(0, ∞)` with linear interpolation; constant beyond
/// the first and last sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    points: Vec<(f64, f64)>,
    monotonicity: Monotonicity,
}

impl Table {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(NevError::arg("gauge table needs at least two samples"));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(NevError::arg("gauge table has repeated abscissae"));
        }
        if let Some(&(t, v)) = points
            .iter()
            .find(|&&(t, v)| !(t > 0.0 && t.is_finite() && v > 0.0 && v.is_finite()))
        {
            return Err(NevError::arg(format!(
                "gauge table sample ({t}, {v}) is not positive and finite"
            )));
        }
        let up = points.windows(2).all(|w| w[1].1 >= w[0].1);
        let down = points.windows(2).all(|w| w[1].1 <= w[0].1);
        let monotonicity = match (up, down) {
            (true, true) => Monotonicity::Constant,
            (true, false) => Monotonicity::Increasing,
            (false, true) => Monotonicity::Decreasing,
            (false, false) => Monotonicity::None,
        };
        Ok(Table {
            points,
            monotonicity,
        })
    }

    /// Tabulate `f` at `t = 2^{-k/per_octave}` for `k = 0..=octaves·per_octave`.
    pub fn dyadic<F: Fn(f64) -> f64>(f: F, octaves: u32, per_octave: u32) -> Result<Self> {
        let n = octaves * per_octave;
        let pts = (0..=n)
            .map(|k| {
                let t = (-(k as f64) / per_octave as f64).exp2();
                (t, f(t))
            })
            .collect();
        Self::new(pts)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn monotonicity(&self) -> Monotonicity {
        self.monotonicity
    }

    pub fn min_t(&self) -> f64 {
        self.points[0].0
    }

    pub fn max_t(&self) -> f64 {
        self.points[self.points.len() - 1].0
    }

    fn segment(&self, t: f64) -> Option<usize> {
        if t <= self.min_t() || t >= self.max_t() {
            return None;
        }
        let i = self.points.partition_point(|&(x, _)| x <= t);
        Some(i - 1)
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= self.min_t() {
            return self.points[0].1;
        }
        if t >= self.max_t() {
            return self.points[self.points.len() - 1].1;
        }
        let i = self.segment(t).expect("interior point");
        let (t0, v0) = self.points[i];
        let (t1, v1) = self.points[i + 1];
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self.segment(t) {
            Some(i) => {
                let (t0, v0) = self.points[i];
                let (t1, v1) = self.points[i + 1];
                (v1 - v0) / (t1 - t0)
            }
            None => 0.0,
        }
    }

    /// Inverse table of a strictly monotone table.
    pub fn inverse(&self) -> Result<Table> {
        let strict = self.points.windows(2).all(|w| w[1].1 > w[0].1)
            || self.points.windows(2).all(|w| w[1].1 < w[0].1);
        if !strict {
            return Err(NevError::arg("only strictly monotone tables can be inverted"));
        }
        Table::new(self.points.iter().map(|&(t, v)| (v, t)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Gauge {
    Power(PowerLaw),
    Table(Table),
    /// `outer(inner(t))`
    Compose { outer: Box<Gauge>, inner: Box<Gauge> },
    Product(Vec<Gauge>),
}

/// Input form used in scenario files.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GaugeSpec {
    Power {
        power: f64,
        #[serde(default)]
        log: f64,
        #[serde(default = "one")]
        coeff: f64,
    },
    Table {
        table: Vec<(f64, f64)>,
    },
}

fn one() -> f64 {
    1.0
}

impl TryFrom<GaugeSpec> for Gauge {
    type Error = NevError;

    fn try_from(spec: GaugeSpec) -> Result<Self> {
        match spec {
            GaugeSpec::Power { power, log, coeff } => Gauge::power_log(coeff, power, log),
            GaugeSpec::Table { table } => Ok(Gauge::Table(Table::new(table)?)),
        }
    }
}

impl fmt::Display for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gauge::Power(p) => write!(f, "{p}"),
            Gauge::Table(t) => write!(f, "table[{} samples]", t.points.len()),
            Gauge::Compose { outer, inner } => write!(f, "({outer})∘({inner})"),
            Gauge::Product(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " × ")?;
                    }
                    write!(f, "({p})")?;
                }
                Ok(())
            }
        }
    }
}

impl Gauge {
    pub fn power_log(coeff: f64, power: f64, log: f64) -> Result<Self> {
        if !(coeff > 0.0 && coeff.is_finite() && power.is_finite() && log.is_finite()) {
            return Err(NevError::arg(format!(
                "gauge needs positive coefficient and finite exponents (c={coeff}, p={power}, q={log})"
            )));
        }
        Ok(Gauge::Power(PowerLaw { coeff, power, log }))
    }

    /// `coeff · t^power`.
    pub fn power(coeff: f64, power: f64) -> Self {
        Gauge::power_log(coeff, power, 0.0).expect("valid power law")
    }

    pub fn identity() -> Self {
        Gauge::power(1.0, 1.0)
    }

    pub fn constant(c: f64) -> Self {
        Gauge::power(c, 0.0)
    }

    pub fn as_power(&self) -> Option<PowerLaw> {
        match self {
            Gauge::Power(p) => Some(*p),
            _ => None,
        }
    }

    pub fn is_symbolic(&self) -> bool {
        self.as_power().is_some()
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Gauge::Power(p) => p.eval(t),
            Gauge::Table(tb) => tb.eval(t),
            Gauge::Compose { outer, inner } => outer.eval(inner.eval(t)),
            Gauge::Product(parts) => parts.iter().map(|g| g.eval(t)).product(),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            Gauge::Power(p) => p.derivative(t),
            Gauge::Table(tb) => tb.derivative(t),
            Gauge::Compose { outer, inner } => outer.derivative(inner.eval(t)) * inner.derivative(t),
            Gauge::Product(parts) => (0..parts.len())
                .map(|i| {
                    parts
                        .iter()
                        .enumerate()
                        .map(|(j, g)| if i == j { g.derivative(t) } else { g.eval(t) })
                        .product::<f64>()
                })
                .sum(),
        }
    }

    /// `lim_{t→0⁺}` of the gauge (may be `0` or `∞`).
    pub fn limit_at_zero(&self) -> f64 {
        match self {
            Gauge::Power(p) => {
                if p.power > EXP_TOL || (p.power.abs() <= EXP_TOL && p.log < 0.0) {
                    0.0
                } else if p.power < -EXP_TOL || p.log > 0.0 {
                    f64::INFINITY
                } else {
                    p.coeff
                }
            }
            Gauge::Table(tb) => tb.points[0].1,
            _ => {
                let v = self.eval(1e-300_f64.max(f64::MIN_POSITIVE));
                if v < 1e-250 {
                    0.0
                } else {
                    v
                }
            }
        }
    }

    /// Nondecreasing near 0 (exactly for power laws and tables, sampled on
    /// a dyadic grid otherwise).
    pub fn is_nondecreasing(&self) -> bool {
        match self {
            Gauge::Power(p) => {
                p.power > EXP_TOL || (p.power.abs() <= EXP_TOL && p.log <= 0.0)
            }
            Gauge::Table(tb) => matches!(
                tb.monotonicity,
                Monotonicity::Increasing | Monotonicity::Constant
            ),
            _ => {
                let vals: Vec<f64> = (0..=160).rev().map(|k| self.eval((-(k as f64) / 4.0).exp2())).collect();
                vals.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12))
            }
        }
    }

    /// Smallest argument at which the gauge is meaningfully sampled.
    pub fn resolution(&self) -> f64 {
        match self {
            Gauge::Table(tb) => tb.min_t(),
            Gauge::Compose { inner, .. } => inner.resolution(),
            Gauge::Product(parts) => parts.iter().map(Gauge::resolution).fold(0.0, f64::max),
            Gauge::Power(_) => 0.0,
        }
    }

    /// Range `[min, max]` of a table gauge on its sample set.
    fn table_range(&self) -> Option<(f64, f64)> {
        match self {
            Gauge::Table(tb) => {
                let lo = tb.points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
                let hi = tb.points.iter().map(|p| p.1).fold(0.0, f64::max);
                Some((lo, hi))
            }
            _ => None,
        }
    }
}

/// `outer ∘ inner`, symbolic whenever the power-log family is closed under
/// the composition.
pub fn compose(outer: &Gauge, inner: &Gauge) -> Result<Gauge> {
    if let (Gauge::Power(o), Gauge::Power(i)) = (outer, inner) {
        if o.log == 0.0 {
            return Gauge::power_log(o.coeff * i.coeff.powf(o.power), o.power * i.power, i.log * o.power);
        }
        if i.coeff == 1.0 && i.log == 0.0 && i.power > 0.0 {
            return Gauge::power_log(o.coeff * i.power.powf(o.log), o.power * i.power, o.log);
        }
    }
    if let (Gauge::Power(o), Some((lo, hi))) = (outer, inner.table_range()) {
        if o.log != 0.0 && (hi >= 1.0 || lo <= 0.0) {
            return Err(NevError::arg(format!(
                "table range [{lo}, {hi}] leaves (0,1), the domain of the log factor in {o}"
            )));
        }
    }
    Ok(Gauge::Compose {
        outer: Box::new(outer.clone()),
        inner: Box::new(inner.clone()),
    })
}

/// Pointwise product, symbolic for power laws.
pub fn product(a: &Gauge, b: &Gauge) -> Gauge {
    match (a, b) {
        (Gauge::Power(x), Gauge::Power(y)) => Gauge::Power(PowerLaw {
            coeff: x.coeff * y.coeff,
            power: x.power + y.power,
            log: x.log + y.log,
        }),
        _ => {
            let mut parts = Vec::new();
            for g in [a, b] {
                match g {
                    Gauge::Product(p) => parts.extend(p.iter().cloned()),
                    other => parts.push(other.clone()),
                }
            }
            Gauge::Product(parts)
        }
    }
}

/// Relation of `g` to `h` as `t → 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AsymptoticClass {
    /// `g = O(h)` but neither `o(h)` nor `Θ(h)` could be established.
    BigO,
    /// `g = o(h)`.
    LittleO,
    /// `g = Ω(h)` only.
    BigOmega,
    /// `g = Θ(h)`.
    Theta,
    /// `g = ω(h)`: Ω but not O.
    LittleOmega,
    Incomparable,
}

impl AsymptoticClass {
    pub fn is_big_o(self) -> bool {
        matches!(self, Self::BigO | Self::LittleO | Self::Theta)
    }

    pub fn is_big_omega(self) -> bool {
        matches!(self, Self::BigOmega | Self::LittleOmega | Self::Theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticVerdict {
    pub class: AsymptoticClass,
    pub heuristic: bool,
}

/// Compare two gauges at 0. Power laws are decided exactly by
/// `(power, log)`; anything else by the ratio trend on a dyadic grid.
pub fn asymptotic_class(g: &Gauge, h: &Gauge) -> AsymptoticVerdict {
    if let (Some(a), Some(b)) = (g.as_power(), h.as_power()) {
        let dp = a.power - b.power;
        let dq = a.log - b.log;
        let class = if dp > EXP_TOL {
            AsymptoticClass::LittleO
        } else if dp < -EXP_TOL {
            AsymptoticClass::LittleOmega
        } else if dq > EXP_TOL {
            AsymptoticClass::LittleOmega
        } else if dq < -EXP_TOL {
            AsymptoticClass::LittleO
        } else {
            AsymptoticClass::Theta
        };
        return AsymptoticVerdict {
            class,
            heuristic: false,
        };
    }
    let floor = g.resolution().max(h.resolution()).max(2f64.powi(-40));
    let kmax = (-floor.log2()).floor().max(8.0) as i32;
    let samples: Vec<(f64, f64)> = (1..=kmax)
        .map(|k| {
            let t = 2f64.powi(-k);
            (t.ln(), (g.eval(t) / h.eval(t)).ln())
        })
        .filter(|(_, r)| r.is_finite())
        .collect();
    let tail = &samples[samples.len() / 2..];
    let slope = fit_slope(tail);
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, r)| (lo.min(r), hi.max(r)));
    let class = if tail.len() < 3 {
        AsymptoticClass::Incomparable
    } else if slope > 0.05 {
        AsymptoticClass::LittleO
    } else if slope < -0.05 {
        AsymptoticClass::LittleOmega
    } else if hi - lo < 100f64.ln() {
        AsymptoticClass::Theta
    } else {
        AsymptoticClass::Incomparable
    };
    AsymptoticVerdict {
        class,
        heuristic: true,
    }
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    if points.len() < 2 {
        return 0.0;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuguryVerdict {
    pub holds: bool,
    pub c: f64,
    pub certificate: String,
    pub heuristic: bool,
}

/// Is `t·F(Ct)·γ'(t)/γ(t)²` integrable on `[0, 1)`?
pub fn is_augury(fortune: &Gauge, gamma: &Gauge, c: f64) -> Result<AuguryVerdict> {
    if !gamma.is_nondecreasing() {
        return Err(NevError::arg(format!("γ = {gamma} is not monotone increasing")));
    }
    if !(c > 0.0) {
        return Err(NevError::arg("augury constant C must be positive"));
    }
    if let (Some(f), Some(g)) = (fortune.as_power(), gamma.as_power()) {
        let flat = g.power.abs() <= EXP_TOL;
        if flat && g.log == 0.0 {
            return Ok(AuguryVerdict {
                holds: true,
                c,
                certificate: "dγ = 0 for constant γ; integrand vanishes".into(),
                heuristic: false,
            });
        }
        let e = f.power - g.power;
        let l = f.log - g.log - if flat { 1.0 } else { 0.0 };
        let holds = e > -1.0 + EXP_TOL || ((e + 1.0).abs() <= EXP_TOL && l < -1.0);
        return Ok(AuguryVerdict {
            holds,
            c,
            certificate: format!(
                "integrand ~ t^{e} (log 1/t)^{l}; exponent s - η = {} - {} = {e} {} -1",
                f.power,
                g.power,
                if holds { ">" } else { "<=" }
            ),
            heuristic: false,
        });
    }
    let integrand = |t: f64| {
        let gv = gamma.eval(t);
        t * fortune.eval(c * t) * gamma.derivative(t) / (gv * gv)
    };
    let mut knots: Vec<f64> = Vec::new();
    for g in [fortune, gamma] {
        if let Gauge::Table(tb) = g {
            let scale = if std::ptr::eq(g, fortune) { 1.0 / c } else { 1.0 };
            knots.extend(tb.points.iter().map(|p| p.0 * scale));
        }
    }
    let mut terms = Vec::new();
    let mut sum = 0.0;
    for k in 0..40 {
        let (a, b) = (2f64.powi(-k - 1), 2f64.powi(-k));
        let r = integrate(integrand, &partition(a, b, &knots), QuadOptions::rel(1e-8))?;
        sum += r.value;
        terms.push(r.value.abs());
    }
    let tail: Vec<(f64, f64)> = terms[24..]
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0)
        .map(|(k, &v)| (k as f64, v.log2()))
        .collect();
    let slope = fit_slope(&tail);
    let holds = sum.is_finite() && sum < 1e12 && (tail.is_empty() || slope < -0.05);
    Ok(AuguryVerdict {
        holds,
        c,
        certificate: format!(
            "dyadic annuli down to 2^-40: partial sum {sum:.6e}, log2 term slope {slope:.4}"
        ),
        heuristic: true,
    })
}

/// Augury for some `C` in [`C_SWEEP`].
pub fn is_augury_sweep(fortune: &Gauge, gamma: &Gauge) -> Result<AuguryVerdict> {
    let mut last = None;
    for &c in &C_SWEEP {
        let v = is_augury(fortune, gamma, c)?;
        if v.holds {
            return Ok(v);
        }
        last = Some(v);
    }
    Ok(last.expect("nonempty sweep"))
}

/// Split a power-law fortune `F = c·t^s` as `F = 𝔨 ∘ λ` with
/// `λ = min{F(t)t², t}` near 0 and `𝔨 = F ∘ λ⁻¹`. Returns `(𝔨, λ)`.
pub fn decompose_fortune(fortune: &Gauge) -> Result<(Gauge, Gauge)> {
    let f = match fortune.as_power() {
        Some(p) if p.log == 0.0 => p,
        _ => {
            return Err(NevError::Unsupported(format!(
                "constructive decomposition needs a pure power law, got {fortune}"
            )))
        }
    };
    let e = f.power + 2.0;
    let (scale, exponent) = if e > 1.0 + EXP_TOL {
        (f.coeff, e)
    } else if e < 1.0 - EXP_TOL {
        (1.0, 1.0)
    } else {
        (f.coeff.min(1.0), 1.0)
    };
    let lambda = Gauge::power(scale, exponent);
    // 𝔨(u) = c·(u/scale)^{s/exponent}
    let ratio = f.power / exponent;
    let k = Gauge::power(f.coeff * scale.powf(-ratio), ratio);
    Ok((k, lambda))
}

/// Tabulated analogue of [`decompose_fortune`] on the sample grid of a
/// table fortune: `λ = min{F t², t}` tabulated and `𝔨 = F ∘ λ⁻¹`.
pub fn decompose_fortune_tabulated(fortune: &Table) -> Result<(Gauge, Gauge)> {
    let lam_pts: Vec<(f64, f64)> = fortune
        .points()
        .iter()
        .map(|&(t, v)| (t, (v * t * t).min(t)))
        .collect();
    let lam = Table::new(lam_pts)?;
    let inv = lam.inverse().map_err(|_| {
        NevError::Unsupported("tabulated decomposition needs min{F t², t} strictly increasing".into())
    })?;
    let k = Gauge::Compose {
        outer: Box::new(Gauge::Table(fortune.clone())),
        inner: Box::new(Gauge::Table(inv)),
    };
    Ok((k, Gauge::Table(lam)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn approx_power(g: &Gauge, c: f64, p: f64) {
        let pl = g.as_power().expect("symbolic");
        assert!((pl.coeff - c).abs() < 1e-12 * c.max(1.0), "coeff {} vs {c}", pl.coeff);
        assert!((pl.power - p).abs() < 1e-12, "power {} vs {p}", pl.power);
    }

    #[test]
    fn compose_examples() {
        approx_power(&compose(&Gauge::power(1.0, 0.7), &Gauge::power(1.0, 1.3)).unwrap(), 1.0, 0.91);
        approx_power(&compose(&Gauge::constant(1.0), &Gauge::power(3.0, 2.0)).unwrap(), 1.0, 0.0);
        approx_power(
            &compose(&Gauge::power(1.0, 0.5), &Gauge::power(2.0, 1.0)).unwrap(),
            2f64.sqrt(),
            0.5,
        );
    }

    #[test]
    fn compose_table_into_log_gauge_checks_range() {
        let tb = Gauge::Table(Table::new(vec![(0.1, 0.5), (1.0, 2.0)]).unwrap());
        let lg = Gauge::power_log(1.0, 1.0, 1.0).unwrap();
        assert!(compose(&lg, &tb).is_err());
        let c = compose(&Gauge::power(1.0, 2.0), &tb).unwrap();
        assert!((c.eval(1.0) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn asymptotic_examples() {
        let t = Gauge::identity();
        assert_eq!(asymptotic_class(&Gauge::power(1.0, 2.0), &t).class, AsymptoticClass::LittleO);
        assert_eq!(asymptotic_class(&Gauge::power(3.0, 1.0), &t).class, AsymptoticClass::Theta);
        let tlog = Gauge::power_log(1.0, 1.0, 1.0).unwrap();
        let v = asymptotic_class(&tlog, &t);
        assert_eq!(v.class, AsymptoticClass::LittleOmega);
        assert!(v.class.is_big_omega() && !v.class.is_big_o());
        assert!(!v.heuristic);
    }

    #[test]
    fn tabulated_comparisons_are_flagged() {
        let sq = Gauge::Table(Table::dyadic(|t| t * t, 40, 1).unwrap());
        let v = asymptotic_class(&sq, &Gauge::identity());
        assert_eq!(v.class, AsymptoticClass::LittleO);
        assert!(v.heuristic);
        let lin = Gauge::Table(Table::dyadic(|t| 2.0 * t, 40, 1).unwrap());
        assert_eq!(asymptotic_class(&lin, &Gauge::identity()).class, AsymptoticClass::Theta);
    }

    #[test]
    fn augury_examples() {
        let v = is_augury(&Gauge::power(1.0, 1.2), &Gauge::power(1.0, 1.5), 1.0).unwrap();
        assert!(v.holds && !v.heuristic);
        // F = t^{α+αβ−1}, γ = t^η, η < α(β+1)
        let (alpha, beta, eta) = (0.5, 1.0, 0.9);
        let f = Gauge::power(1.0, alpha + alpha * beta - 1.0);
        assert!(is_augury(&f, &Gauge::power(1.0, eta), 1.0).unwrap().holds);
        assert!(!is_augury(&f, &Gauge::power(1.0, 1.1), 1.0).unwrap().holds);
        assert!(!is_augury(&Gauge::constant(1.0), &Gauge::identity(), 1.0).unwrap().holds);
    }

    #[test]
    fn augury_rejects_decreasing_gamma() {
        let r = is_augury(&Gauge::constant(1.0), &Gauge::power(1.0, -1.0), 1.0);
        assert!(matches!(r, Err(NevError::Argument(_))));
    }

    #[test]
    fn tabulated_augury_tracks_exponents() {
        let g = Gauge::power(1.0, 1.2);
        let good = Gauge::Table(Table::dyadic(|t| t.powf(0.5), 45, 2).unwrap());
        let bad = Gauge::Table(Table::dyadic(|t| t.powf(-0.1), 45, 2).unwrap());
        let v = is_augury(&good, &g, 1.0).unwrap();
        assert!(v.holds && v.heuristic);
        assert!(!is_augury(&bad, &g, 1.0).unwrap().holds);
    }

    #[test]
    fn decompose_examples() {
        let (k, l) = decompose_fortune(&Gauge::constant(1.0)).unwrap();
        approx_power(&l, 1.0, 2.0);
        approx_power(&k, 1.0, 0.0);
        let (k, l) = decompose_fortune(&Gauge::identity()).unwrap();
        approx_power(&l, 1.0, 3.0);
        approx_power(&k, 1.0, 1.0 / 3.0);
        let (k, l) = decompose_fortune(&Gauge::power(1.0, -0.5)).unwrap();
        approx_power(&l, 1.0, 1.5);
        approx_power(&k, 1.0, -1.0 / 3.0);
        assert!(matches!(
            decompose_fortune(&Gauge::Table(Table::new(vec![(0.1, 1.0), (1.0, 2.0)]).unwrap())),
            Err(NevError::Unsupported(_))
        ));
    }

    #[test]
    fn tabulated_decomposition_reproduces_fortune() {
        let tb = Table::dyadic(|t| 2.0 * t.sqrt(), 30, 1).unwrap();
        let (k, l) = decompose_fortune_tabulated(&tb).unwrap();
        for j in 0..30 {
            let t = 2f64.powi(-j);
            let want = tb.eval(t);
            assert!((k.eval(l.eval(t)) - want).abs() < 1e-12 * want);
        }
    }

    proptest! {
        #[test]
        fn compose_associative(c1 in 0.1f64..4.0, p1 in -2.0f64..3.0, c2 in 0.1f64..4.0, p2 in 0.1f64..3.0,
                               c3 in 0.1f64..4.0, p3 in 0.1f64..3.0) {
            let (a, b, c) = (Gauge::power(c1, p1), Gauge::power(c2, p2), Gauge::power(c3, p3));
            let left = compose(&compose(&a, &b).unwrap(), &c).unwrap().as_power().unwrap();
            let right = compose(&a, &compose(&b, &c).unwrap()).unwrap().as_power().unwrap();
            prop_assert!((left.power - right.power).abs() < 1e-12);
            prop_assert!((left.coeff - right.coeff).abs() < 1e-9 * left.coeff);
            let id = compose(&a, &Gauge::identity()).unwrap();
            prop_assert_eq!(id, a.clone());
        }

        #[test]
        fn decomposition_invariants(c in 0.1f64..5.0, s in -3.0f64..3.0) {
            let f = Gauge::power(c, s);
            let (k, l) = decompose_fortune(&f).unwrap();
            prop_assert!(asymptotic_class(&l, &Gauge::identity()).class.is_big_o());
            let back = compose(&k, &l).unwrap().as_power().unwrap();
            prop_assert!((back.power - s).abs() < 1e-12);
            prop_assert!((back.coeff - c).abs() < 1e-9 * c);
            let ft2 = product(&f, &Gauge::power(1.0, 2.0));
            prop_assert!(asymptotic_class(&l, &ft2).class.is_big_o());
        }

        #[test]
        fn augury_monotone_in_fortune(s1 in -3.0f64..3.0, ds in 0.0f64..2.0, eta in 0.1f64..3.0) {
            // t^{s1+ds} ≤ t^{s1} near 0
            let gamma = Gauge::power(1.0, eta);
            let big = is_augury(&Gauge::power(1.0, s1), &gamma, 1.0).unwrap().holds;
            let small = is_augury(&Gauge::power(1.0, s1 + ds), &gamma, 1.0).unwrap().holds;
            prop_assert!(!big || small);
        }

        #[test]
        fn little_o_implies_big_o(p in -2.0f64..2.0, q in -2.0f64..2.0, p2 in -2.0f64..2.0) {
            let v = asymptotic_class(&Gauge::power_log(1.0, p, q).unwrap(), &Gauge::power(2.0, p2)).class;
            if v == AsymptoticClass::LittleO || v == AsymptoticClass::Theta {
                prop_assert!(v.is_big_o());
            }
            if v == AsymptoticClass::Theta {
                prop_assert!(v.is_big_omega());
            }
        }
    }
}
