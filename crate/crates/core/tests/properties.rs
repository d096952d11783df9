//! Cross-module properties checked against oracles computed here.

use nevlab::gauges::{Gauge, C_SWEEP};
use nevlab::measures::{layer_cake_residual, Measure};
use nevlab::pick::PickFunction;
use nevlab::quotients::{augur_bounds, averaged_quotient_direct, averaged_quotient_kernel, fit_augur_constants};
use nevlab::regularity::gamma_regular_verdict;
use proptest::prelude::*;

/// Cantor mass of `[lo, hi]` by the IFS recursion `μ(A) = ½μ(3A) + ½μ(3A − 2)`.
fn cantor_mass(lo: f64, hi: f64, depth: u32) -> f64 {
    let (lo, hi) = (lo.max(0.0), hi.min(1.0));
    if hi <= lo {
        return 0.0;
    }
    if lo <= 0.0 && hi >= 1.0 {
        return 1.0;
    }
    if depth == 0 {
        return hi - lo;
    }
    0.5 * cantor_mass(3.0 * lo, 3.0 * hi, depth - 1) + 0.5 * cantor_mass(3.0 * lo - 2.0, 3.0 * hi - 2.0, depth - 1)
}

#[test]
fn cantor_window_mass_matches_recursion() {
    let mu = Measure::cantor();
    for k in 1..=10 {
        let eps = 3f64.powi(-k);
        assert!((mu.window_mass(0.0, eps).unwrap() - 0.5f64.powi(k)).abs() < 1e-12);
    }
    for (tau, eps) in [(0.3, 0.05), (0.5, 0.2), (0.9, 0.01), (0.21, 0.004)] {
        let want = cantor_mass(tau - eps, tau + eps, 40);
        assert!((mu.window_mass(tau, eps).unwrap() - want).abs() < 1e-9, "{tau} {eps}");
    }
}

/// `arctan u − arctan v` without cancellation when both lie on one side.
fn atan_diff(u: f64, v: f64) -> f64 {
    if u * v > 0.0 {
        ((u - v) / (1.0 + u * v)).atan()
    } else {
        u.atan() - v.atan()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn atom_quotient_matches_arctan_oracle(
        at in -1.0f64..1.0, mass in 0.1f64..3.0, tau in -0.5f64..0.5,
        e in 3i32..16, c in 0.2f64..2.0, p in 1.0f64..2.0,
    ) {
        let eps = 2f64.powi(-e);
        let f = PickFunction::triple(0.0, 0.0, Measure::dirac(at, mass).unwrap()).unwrap();
        let (k, l) = (Gauge::constant(1.0), Gauge::power(c, p));
        let h = c * eps.powf(p);
        let want = mass * atan_diff((tau + eps - at) / h, (tau - eps - at) / h) / (2.0 * eps);
        let d = averaged_quotient_direct(&f, &k, &l, tau, eps).unwrap();
        let q = averaged_quotient_kernel(&f, &k, &l, tau, eps).unwrap();
        prop_assert!((q - want).abs() <= 1e-10 * want.abs().max(1e-300), "{} vs {}", q, want);
        prop_assert!((d - want).abs() <= 1e-8 * want.abs().max(1e-12));
    }

    #[test]
    fn augur_sandwich_for_two_atoms(
        t1 in -0.9f64..-0.01, t2 in 0.01f64..0.9, m1 in 0.1f64..2.0, m2 in 0.1f64..2.0,
        e in 4i32..18, square in any::<bool>(),
    ) {
        let mu = Measure::atoms(vec![(t1, m1), (t2, m2)]).unwrap();
        let f = PickFunction::triple(0.0, 0.0, mu.clone()).unwrap();
        let l = if square { Gauge::power(1.0, 2.0) } else { Gauge::identity() };
        let one = Gauge::constant(1.0);
        let c = fit_augur_constants(&mu, 0.0, &l, 0.0, 0.125).unwrap();
        let eps = 2f64.powi(-e);
        let a = averaged_quotient_kernel(&f, &one, &l, 0.0, eps).unwrap();
        let b = augur_bounds(&mu, 0.0, &one, &l, 0.0, eps, c).unwrap();
        prop_assert!(b.lower <= a * (1.0 + 1e-9) && a <= b.upper() * (1.0 + 1e-9));
    }

    #[test]
    fn layer_cake_matches_power_integral(p in 0.0f64..1.5, d in 0.05f64..0.9) {
        // ∫_{-1}^{1} |t|^p · |t|^{-η} dt = 2/(p − η + 1)
        let eta = p + 1.0 - d;
        let mu = Measure::power_density(0.0, 1.0, 1.0, p).unwrap();
        let r = layer_cake_residual(&mu, &Gauge::power(1.0, eta), 0.0).unwrap();
        let want = 2.0 / d;
        let lhs = r.lhs.value().unwrap();
        prop_assert!((lhs - want).abs() <= 1e-6 * want, "{} vs {}", lhs, want);
        prop_assert!(r.residual.value().unwrap().abs() <= 1e-6 * want);
    }

    #[test]
    fn gamma_regularity_follows_the_exponent_rule(p in 0.0f64..1.5, eta in 0.1f64..3.0) {
        prop_assume!((p - eta + 1.0).abs() > 0.1);
        let mu = Measure::power_density(0.0, 1.0, 1.0, p).unwrap();
        let v = gamma_regular_verdict(&mu, &Gauge::power(1.0, eta), 0.0, &C_SWEEP);
        if eta <= 1.0 || p - eta > -1.0 {
            prop_assert_eq!(v.unwrap().holds, p - eta > -1.0);
        }
    }

    #[test]
    fn triples_map_the_half_plane_into_itself(
        a in -2.0f64..2.0, b in 0.0f64..2.0, at in -1.0f64..1.0, p in -0.5f64..1.5, seed in 0u64..1000,
    ) {
        let mu = Measure::dirac(at, 0.5).unwrap().plus(Measure::power_density(0.0, 1.0, 1.0, p).unwrap());
        let f = PickFunction::triple(a, b, mu).unwrap();
        prop_assert!(f.min_imaginary_part(64, seed).unwrap() >= 0.0);
    }
}
