//! Pick functions: analytic self-maps of the upper half-plane.
//!
//! A [`PickFunction`] is stored in one of four forms. Nevanlinna triples and
//! matrix resolvents carry their spectral measure explicitly; Möbius images
//! and negative reciprocals are kept as wrappers and evaluated pointwise.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{NevError, Result};
use crate::measures::Measure;
use crate::netgen::upper_half_plane_sample;
use crate::quad::{integrate, partition, QuadOptions};

const SYMMETRY_TOL: f64 = 1e-12;
const NORM_TOL: f64 = 1e-12;
const TINY: f64 = 1e-300;

/// `w ↦ (a·w + b)/(c·w + d)` with `ad − bc > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MobiusMap {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl MobiusMap {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det > 0.0 && det.is_finite()) {
            return Err(NevError::arg(format!(
                "Möbius map ({a}, {b}, {c}, {d}) has determinant {det}; need ad − bc > 0"
            )));
        }
        Ok(MobiusMap { a, b, c, d })
    }

    pub fn identity() -> Self {
        MobiusMap { a: 1.0, b: 0.0, c: 0.0, d: 1.0 }
    }

    pub fn apply(&self, w: Complex64) -> Result<Complex64> {
        let den = self.c * w + self.d;
        if den.norm() <= TINY {
            return Err(NevError::Singularity(format!("Möbius denominator vanishes at w = {w}")));
        }
        Ok((self.a * w + self.b) / den)
    }

    /// Image of a real boundary value; `None` for the pole `w = −d/c`.
    pub fn apply_real(&self, w: f64) -> Option<f64> {
        let den = self.c * w + self.d;
        (den.abs() > TINY).then(|| (self.a * w + self.b) / den)
    }

    /// Image of the boundary point `∞`.
    pub fn at_infinity(&self) -> Option<f64> {
        (self.c != 0.0).then(|| self.a / self.c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum PickForm {
    /// `a + b·z + ∫ (1/(t − z) − t/(1 + t²)) dμ(t)`
    Triple { a: f64, b: f64, mu: Measure },
    /// `⟨(A − z)⁻¹φ, φ⟩`, stored through the eigendecomposition of `A`.
    Resolvent {
        #[serde(skip)]
        matrix: DMatrix<f64>,
        #[serde(skip)]
        phi: DVector<f64>,
        eigenvalues: Vec<f64>,
        weights: Vec<f64>,
    },
    MobiusOf { map: MobiusMap, inner: Box<PickFunction> },
    NegativeReciprocal { inner: Box<PickFunction> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PickFunction {
    pub form: PickForm,
}

impl PickFunction {
    pub fn triple(a: f64, b: f64, mu: Measure) -> Result<Self> {
        if !a.is_finite() {
            return Err(NevError::arg("real part a must be finite"));
        }
        if !(b >= 0.0 && b.is_finite()) {
            return Err(NevError::arg(format!("linear coefficient b must be ≥ 0, got {b}")));
        }
        Ok(PickFunction {
            form: PickForm::Triple { a, b, mu },
        })
    }

    /// `f(z) = z`.
    pub fn identity() -> Self {
        Self::triple(0.0, 1.0, Measure::zero()).expect("valid triple")
    }

    /// `f(z) = −1/z`, the triple `(0, 0, δ₀)`.
    pub fn neg_inverse() -> Self {
        Self::triple(0.0, 0.0, Measure::dirac(0.0, 1.0).expect("unit atom")).expect("valid triple")
    }

    /// `F(z) = ⟨(A − z)⁻¹φ, φ⟩` for symmetric `A` and unit `φ`.
    pub fn resolvent(matrix: DMatrix<f64>, phi: DVector<f64>) -> Result<Self> {
        check_symmetric(&matrix)?;
        check_unit(&phi, matrix.nrows())?;
        let (eigenvalues, weights) = spectral_data(&matrix, &phi);
        Ok(PickFunction {
            form: PickForm::Resolvent {
                matrix,
                phi,
                eigenvalues,
                weights,
            },
        })
    }

    /// Resolvent of the Jacobi matrix with the given diagonal and
    /// off-diagonal, at the first basis vector.
    pub fn jacobi(diagonal: &[f64], off_diagonal: &[f64]) -> Result<Self> {
        let n = diagonal.len();
        if n == 0 || off_diagonal.len() + 1 != n {
            return Err(NevError::arg(format!(
                "Jacobi matrix: {} diagonal entries need {} off-diagonal entries, got {}",
                n,
                n.saturating_sub(1),
                off_diagonal.len()
            )));
        }
        let mut m = DMatrix::from_diagonal(&DVector::from_column_slice(diagonal));
        for (i, &v) in off_diagonal.iter().enumerate() {
            m[(i, i + 1)] = v;
            m[(i + 1, i)] = v;
        }
        let mut phi = DVector::zeros(n);
        phi[0] = 1.0;
        Self::resolvent(m, phi)
    }

    pub fn negative_reciprocal(inner: PickFunction) -> Self {
        PickFunction {
            form: PickForm::NegativeReciprocal { inner: Box::new(inner) },
        }
    }

    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        if !(z.im > 0.0) {
            return Err(NevError::Domain(format!("Pick functions live on Im z > 0, got {z}")));
        }
        match &self.form {
            PickForm::Triple { a, b, mu } => Ok(*a + *b * z + mu.cauchy_integral(z)?),
            PickForm::Resolvent { eigenvalues, weights, .. } => Ok(eigenvalues
                .iter()
                .zip(weights)
                .map(|(&l, &w)| w / (Complex64::new(l, 0.0) - z))
                .sum()),
            PickForm::MobiusOf { map, inner } => map.apply(inner.evaluate(z)?),
            PickForm::NegativeReciprocal { inner } => {
                let w = inner.evaluate(z)?;
                if w.norm() <= TINY {
                    return Err(NevError::Singularity(format!("−1/f: f vanishes at {z}")));
                }
                Ok(-1.0 / w)
            }
        }
    }

    /// `(a, b, μ)` when the representing measure is known explicitly.
    pub fn as_triple(&self) -> Option<(f64, f64, Measure)> {
        match &self.form {
            PickForm::Triple { a, b, mu } => Some((*a, *b, mu.clone())),
            PickForm::Resolvent { eigenvalues, weights, .. } => {
                let mu = merged_atoms(eigenvalues, weights);
                // Σ w/(λ − z) = a + ∫(1/(t − z) − t/(1 + t²))dμ with a = ∫ t/(1 + t²) dμ
                let a = mu.atom_list().iter().map(|&(t, m)| m * t / (1.0 + t * t)).sum();
                Some((a, 0.0, mu))
            }
            _ => None,
        }
    }

    /// Real points of `[lo, hi]` near which `Im f` varies on the scale
    /// `resolution` (quadrature breakpoints).
    pub fn boundary_hints(&self, lo: f64, hi: f64, resolution: f64) -> Vec<f64> {
        match &self.form {
            PickForm::Triple { mu, .. } => mu.boundary_hints(lo, hi, resolution),
            PickForm::Resolvent { eigenvalues, .. } => {
                eigenvalues.iter().copied().filter(|&t| t >= lo && t <= hi).collect()
            }
            PickForm::MobiusOf { inner, .. } | PickForm::NegativeReciprocal { inner } => {
                inner.boundary_hints(lo, hi, resolution)
            }
        }
    }

    /// `Im f(z)`; cheaper than [`evaluate`](Self::evaluate) for triples.
    pub fn imag_part(&self, z: Complex64) -> Result<f64> {
        match &self.form {
            PickForm::Triple { b, mu, .. } => {
                if !(z.im > 0.0) {
                    return Err(NevError::Domain(format!("Pick functions live on Im z > 0, got {z}")));
                }
                Ok(b * z.im + mu.poisson_extension(z.re, z.im)?)
            }
            _ => Ok(self.evaluate(z)?.im),
        }
    }

    /// Smallest `Im f(z)` over a quasi-random sample of Π.
    pub fn min_imaginary_part(&self, samples: usize, seed: u64) -> Result<f64> {
        let mut worst = f64::INFINITY;
        for z in upper_half_plane_sample(samples, seed) {
            worst = worst.min(self.evaluate(z)?.im);
        }
        Ok(worst)
    }
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(NevError::arg("matrix must be square and nonempty"));
    }
    let scale = m.amax().max(1.0);
    if (m - m.transpose()).amax() > SYMMETRY_TOL * scale {
        return Err(NevError::arg("matrix is not symmetric"));
    }
    Ok(())
}

fn check_unit(phi: &DVector<f64>, n: usize) -> Result<()> {
    if phi.len() != n {
        return Err(NevError::arg(format!("vector has length {}, matrix order {n}", phi.len())));
    }
    if (phi.norm() - 1.0).abs() > NORM_TOL {
        return Err(NevError::arg(format!("vector norm {} is not 1", phi.norm())));
    }
    Ok(())
}

fn spectral_data(m: &DMatrix<f64>, phi: &DVector<f64>) -> (Vec<f64>, Vec<f64>) {
    let eig = SymmetricEigen::new(m.clone());
    let mut pairs: Vec<(f64, f64)> = (0..m.nrows())
        .map(|k| {
            let v = eig.eigenvectors.column(k);
            let p = v.dot(phi);
            (eig.eigenvalues[k], p * p)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    pairs.into_iter().unzip()
}

/// Atomic measure with coincident eigenvalues merged and null masses dropped.
fn merged_atoms(eigenvalues: &[f64], weights: &[f64]) -> Measure {
    let scale = eigenvalues.iter().fold(1.0f64, |s, l| s.max(l.abs()));
    let mut atoms: Vec<(f64, f64)> = Vec::new();
    for (&l, &w) in eigenvalues.iter().zip(weights) {
        match atoms.last_mut() {
            Some((t, m)) if (l - *t).abs() <= 1e-12 * scale => *m += w,
            _ => atoms.push((l, w)),
        }
    }
    atoms.retain(|&(_, m)| m > 0.0);
    if atoms.is_empty() {
        return Measure::zero();
    }
    Measure::atoms(atoms).expect("sorted positive atoms")
}

/// `M ∘ f` as a wrapper.
pub fn mobius_compose(map: MobiusMap, f: &PickFunction) -> PickFunction {
    PickFunction {
        form: PickForm::MobiusOf {
            map,
            inner: Box::new(f.clone()),
        },
    }
}

/// `F_α = F/(1 + αF)`.
pub fn aronszajn_krein(f: &PickFunction, alpha: f64) -> PickFunction {
    mobius_compose(MobiusMap { a: 1.0, b: 0.0, c: alpha, d: 1.0 }, f)
}

/// `A_α = A + α⟨·, φ⟩φ` and the spectral measure of `A_α` at φ.
pub fn rank_one_perturb(a: &DMatrix<f64>, phi: &DVector<f64>, alpha: f64) -> Result<(DMatrix<f64>, Measure)> {
    check_symmetric(a)?;
    check_unit(phi, a.nrows())?;
    let a_alpha = a + alpha * phi * phi.transpose();
    let (vals, weights) = spectral_data(&a_alpha, phi);
    Ok((a_alpha, merged_atoms(&vals, &weights)))
}

/// `(1/π) ∫_{τ−ε}^{τ+ε} Im f(x + iy) dx`, which tends to `μ((τ−ε, τ+ε))`
/// as `y → 0` when the endpoints carry no mass.
pub fn boundary_measure_window(f: &PickFunction, tau: f64, eps: f64, y: f64) -> Result<f64> {
    if !(eps > 0.0 && y > 0.0) {
        return Err(NevError::arg("window half-width and height must be positive"));
    }
    if y > eps {
        return Err(NevError::arg(format!("height {y} exceeds window half-width {eps}")));
    }
    let mut hints = f.boundary_hints(tau - eps, tau + eps, 4.0 * y);
    hints.push(tau);
    let failure = std::cell::Cell::new(None);
    let r = integrate(
        |x: f64| match f.imag_part(Complex64::new(x, y)) {
            Ok(v) => v,
            Err(e) => {
                failure.set(Some(e));
                0.0
            }
        },
        &partition(tau - eps, tau + eps, &hints),
        QuadOptions { rel_tol: 1e-9, abs_tol: 1e-15, max_intervals: 50_000 },
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(r.value / PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn jacobi_50() -> PickFunction {
        let diag: Vec<f64> = (0..50).map(|k| (0.3 * k as f64).sin()).collect();
        let off: Vec<f64> = (0..49).map(|k| 1.0 + 0.2 * (0.7 * k as f64).cos()).collect();
        PickFunction::jacobi(&diag, &off).unwrap()
    }

    #[test]
    fn evaluation_examples() {
        assert_eq!(PickFunction::identity().evaluate(c(2.0, 3.0)).unwrap(), c(2.0, 3.0));
        assert!((PickFunction::neg_inverse().evaluate(c(0.0, 1.0)).unwrap() - c(0.0, 1.0)).norm() < 1e-15);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let f = PickFunction::resolvent(
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0])),
            DVector::from_vec(vec![s, s]),
        )
        .unwrap();
        // ½/(1 − i) + ½/(−1 − i) = i/2
        assert!((f.evaluate(c(0.0, 1.0)).unwrap() - c(0.0, 0.5)).norm() < 1e-14);
        assert!(matches!(f.evaluate(c(0.0, 0.0)), Err(NevError::Domain(_))));
    }

    #[test]
    fn mobius_examples() {
        let id = PickFunction::identity();
        let inv = mobius_compose(MobiusMap::new(0.0, -1.0, 1.0, 0.0).unwrap(), &id);
        let z = c(0.4, 0.9);
        assert!((inv.evaluate(z).unwrap() + 1.0 / z).norm() < 1e-15);
        let shift = mobius_compose(MobiusMap::new(1.0, 1.0, 0.0, 1.0).unwrap(), &PickFunction::neg_inverse());
        assert!((shift.evaluate(c(0.0, 1.0)).unwrap() - c(1.0, 1.0)).norm() < 1e-15);
        assert!(MobiusMap::new(1.0, 2.0, 3.0, 4.0).is_err());
        let f = jacobi_50();
        let same = mobius_compose(MobiusMap::identity(), &f);
        for z in upper_half_plane_sample(20, 1) {
            assert_eq!(same.evaluate(z).unwrap(), f.evaluate(z).unwrap());
        }
    }

    #[test]
    fn aronszajn_krein_examples() {
        let f = PickFunction::neg_inverse();
        let g = aronszajn_krein(&f, 1.0);
        assert!((g.evaluate(c(0.0, 1.0)).unwrap() - c(0.5, 0.5)).norm() < 1e-15);
        let z = c(0.3, 0.2);
        assert_eq!(aronszajn_krein(&f, 0.0).evaluate(z).unwrap(), f.evaluate(z).unwrap());
    }

    #[test]
    fn rank_one_matches_aronszajn_krein() {
        let f = jacobi_50();
        let PickForm::Resolvent { matrix, phi, .. } = &f.form else { unreachable!() };
        let (_, mu) = rank_one_perturb(matrix, phi, 0.7).unwrap();
        assert!((mu.total_mass() - 1.0).abs() < 1e-10);
        let g = aronszajn_krein(&f, 0.7);
        for z in upper_half_plane_sample(100, 3) {
            let direct: Complex64 = mu
                .atom_list()
                .iter()
                .map(|&(t, m)| m / (Complex64::new(t, 0.0) - z))
                .sum();
            let via = g.evaluate(z).unwrap();
            assert!((direct - via).norm() < 1e-9 * via.norm(), "{z}: {direct} vs {via}");
        }
    }

    #[test]
    fn rank_one_small_cases() {
        let (a1, mu) = rank_one_perturb(&DMatrix::from_element(1, 1, 0.0), &DVector::from_element(1, 1.0), 2.0)
            .unwrap();
        assert_eq!(a1[(0, 0)], 2.0);
        assert_eq!(mu.atom_list(), vec![(2.0, 1.0)]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phi = DVector::from_vec(vec![s, s]);
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]));
        let (_, mu) = rank_one_perturb(&a, &phi, 1.0).unwrap();
        let atoms = mu.atom_list();
        let r5 = 5f64.sqrt();
        assert!((atoms[0].0 - (1.0 - r5) / 2.0).abs() < 1e-14);
        assert!((atoms[1].0 - (1.0 + r5) / 2.0).abs() < 1e-14);
        // eigenvector (x, 1) of [[1.5, .5], [.5, −.5]] has x = 2λ + 1 ... mass ½(x + 1)²/(x² + 1)
        for &(l, m) in &atoms {
            let x = 2.0 * l + 1.0;
            let want = 0.5 * (x + 1.0).powi(2) / (x * x + 1.0);
            assert!((m - want).abs() < 1e-13, "{m} vs {want}");
        }
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(rank_one_perturb(&bad, &phi, 1.0), Err(NevError::Argument(_))));
    }

    #[test]
    fn resolvent_matches_linear_solve() {
        let f = jacobi_50();
        let PickForm::Resolvent { matrix, phi, .. } = &f.form else { unreachable!() };
        let n = matrix.nrows();
        for z in upper_half_plane_sample(30, 5) {
            let shifted: DMatrix<Complex64> =
                matrix.map(|v| Complex64::new(v, 0.0)) - DMatrix::from_diagonal_element(n, n, z);
            let rhs: DVector<Complex64> = phi.map(|v| Complex64::new(v, 0.0));
            let x = shifted.lu().solve(&rhs).unwrap();
            let direct = x.dot(&rhs);
            let got = f.evaluate(z).unwrap();
            assert!((got - direct).norm() < 1e-10 * direct.norm());
        }
    }

    #[test]
    fn resolvent_triple_form_agrees() {
        let f = jacobi_50();
        let (a, b, mu) = f.as_triple().unwrap();
        let g = PickFunction::triple(a, b, mu).unwrap();
        for z in upper_half_plane_sample(20, 9) {
            let (u, v) = (f.evaluate(z).unwrap(), g.evaluate(z).unwrap());
            assert!((u - v).norm() < 1e-11 * u.norm().max(1.0));
        }
    }

    #[test]
    fn boundary_window_examples() {
        let v = boundary_measure_window(&PickFunction::identity(), 0.0, 1.0, 0.01).unwrap();
        assert!((v - 0.02 / PI).abs() < 1e-12);
        let v = boundary_measure_window(&PickFunction::neg_inverse(), 0.0, 1.0, 1e-6).unwrap();
        assert!((v - 1.0).abs() < 1e-3);
        let constant = PickFunction::triple(5.0, 0.0, Measure::zero()).unwrap();
        assert_eq!(boundary_measure_window(&constant, 0.0, 1.0, 0.1).unwrap(), 0.0);
        assert!(boundary_measure_window(&constant, 0.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn self_map_property_on_corpus() {
        let corpus = vec![
            PickFunction::identity(),
            PickFunction::neg_inverse(),
            jacobi_50(),
            PickFunction::triple(0.3, 0.5, Measure::cantor()).unwrap(),
            PickFunction::negative_reciprocal(PickFunction::triple(0.0, 0.0, Measure::uniform(-1.0, 1.0).unwrap()).unwrap()),
            mobius_compose(MobiusMap::new(2.0, 1.0, 1.0, 1.0).unwrap(), &jacobi_50()),
        ];
        for f in &corpus {
            assert!(f.min_imaginary_part(200, 11).unwrap() >= -1e-12);
        }
    }

    proptest! {
        #[test]
        fn aronszajn_krein_round_trip(alpha in -3.0f64..3.0, x in -2.0f64..2.0, y in 0.01f64..3.0) {
            let f = jacobi_50();
            let back = aronszajn_krein(&aronszajn_krein(&f, alpha), -alpha);
            let z = c(x, y);
            let (u, v) = (f.evaluate(z).unwrap(), back.evaluate(z).unwrap());
            prop_assert!((u - v).norm() < 1e-10 * u.norm().max(1.0));
        }

        #[test]
        fn mobius_images_stay_in_half_plane(a in 0.1f64..3.0, b in -2.0f64..2.0, cc in -2.0f64..2.0,
                                            x in -2.0f64..2.0, y in 0.001f64..3.0) {
            let d = (1.0 + b * cc) / a;
            let m = MobiusMap::new(a, b, cc, d).unwrap();
            let w = mobius_compose(m, &jacobi_50()).evaluate(c(x, y)).unwrap();
            prop_assert!(w.im >= -1e-12);
        }
    }
}
