//! Self-similar (IFS) measures: masses of windows and integrals of
//! smooth kernels.
//!
//! Every cell of the IFS tree is the image of the support under a composed
//! affine map `t ↦ scale·t + offset`, so its mean and central moments follow
//! from the moments of the invariant measure. Integrals use a third-order
//! moment expansion of the kernel on each cell; a cell is accepted once its
//! width is below `eta` times the distance to the nearest kernel singularity.

use serde::Serialize;

use super::{Kernel, Window};
use crate::error::{NevError, Result};

const MAX_DEPTH: usize = 90;
/// Width/distance ratio at which the moment expansion is accepted.
pub const DEFAULT_ETA: f64 = 2e-2;
/// Cells lighter than this are resolved by linear overlap in window sums.
const MASS_RESOLUTION: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfSimilarComponent {
    maps: Vec<(f64, f64)>,
    weights: Vec<f64>,
    support: (f64, f64),
    total_mass: f64,
    #[serde(skip)]
    moments: BaseMoments,
}

/// Mean and central moments of the normalized invariant measure.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct BaseMoments {
    mean: f64,
    var: f64,
    third: f64,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    scale: f64,
    offset: f64,
    mass: f64,
    depth: usize,
}

impl SelfSimilarComponent {
    /// `maps` are `(ratio, offset)` pairs acting as `t ↦ ratio·t + offset`.
    pub fn new(
        maps: Vec<(f64, f64)>,
        weights: Vec<f64>,
        support: (f64, f64),
        total_mass: f64,
    ) -> Result<Self> {
        if maps.is_empty() || maps.len() != weights.len() {
            return Err(NevError::arg("self-similar: need one weight per map"));
        }
        let (s0, s1) = support;
        if !(s0.is_finite() && s1.is_finite() && s0 < s1) {
            return Err(NevError::arg("self-similar: support must be a nondegenerate interval"));
        }
        if !(total_mass > 0.0 && total_mass.is_finite()) {
            return Err(NevError::arg("self-similar: total mass must be positive"));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(NevError::arg("self-similar: weights must be positive"));
        }
        let wsum: f64 = weights.iter().sum();
        if (wsum - 1.0).abs() > 1e-12 {
            return Err(NevError::arg(format!(
                "self-similar: weights sum to {wsum}, expected 1"
            )));
        }
        let span = s1 - s0;
        let tol = 1e-12 * span.max(s0.abs()).max(s1.abs());
        let mut images = Vec::with_capacity(maps.len());
        for &(r, o) in &maps {
            if !(r > 0.0 && r < 1.0) {
                return Err(NevError::arg(format!("self-similar: ratio {r} not in (0,1)")));
            }
            let (a, b) = (r * s0 + o, r * s1 + o);
            if a < s0 - tol || b > s1 + tol {
                return Err(NevError::arg(format!(
                    "self-similar: image [{a}, {b}] leaves the support"
                )));
            }
            images.push((a, b));
        }
        images.sort_by(|x, y| x.0.total_cmp(&y.0));
        for w in images.windows(2) {
            if w[1].0 <= w[0].1 {
                return Err(NevError::arg("self-similar: images of the support overlap"));
            }
        }
        let moments = base_moments(&maps, &weights);
        Ok(SelfSimilarComponent {
            maps,
            weights,
            support,
            total_mass,
            moments,
        })
    }

    /// Standard middle-thirds Cantor measure on `[0, 1]` with unit mass.
    pub fn cantor() -> Self {
        Self::new(
            vec![(1.0 / 3.0, 0.0), (1.0 / 3.0, 2.0 / 3.0)],
            vec![0.5, 0.5],
            (0.0, 1.0),
            1.0,
        )
        .expect("valid Cantor IFS")
    }

    pub fn maps(&self) -> &[(f64, f64)] {
        &self.maps
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// Similarity dimension when all ratios and weights agree, else `None`.
    pub fn uniform_dimension(&self) -> Option<f64> {
        let (r0, _) = self.maps[0];
        let w0 = self.weights[0];
        let uniform = self
            .maps
            .iter()
            .zip(&self.weights)
            .all(|(&(r, _), &w)| (r - r0).abs() < 1e-14 && (w - w0).abs() < 1e-14);
        uniform.then(|| w0.ln() / r0.ln())
    }

    fn root(&self) -> Cell {
        Cell {
            scale: 1.0,
            offset: 0.0,
            mass: self.total_mass,
            depth: 0,
        }
    }

    fn bounds(&self, c: &Cell) -> (f64, f64) {
        (
            c.scale * self.support.0 + c.offset,
            c.scale * self.support.1 + c.offset,
        )
    }

    fn children<'a>(&'a self, c: Cell) -> impl Iterator<Item = Cell> + 'a {
        self.maps
            .iter()
            .zip(&self.weights)
            .map(move |(&(r, o), &w)| Cell {
                scale: c.scale * r,
                offset: c.scale * o + c.offset,
                mass: c.mass * w,
                depth: c.depth + 1,
            })
    }

    /// Mass of a window. The measure has no atoms, so open and closed
    /// windows agree.
    pub fn interval_mass(&self, lo: f64, hi: f64) -> f64 {
        self.interval_mass_truncated(lo, hi, MAX_DEPTH).0
    }

    /// Window mass with recursion cut at `max_depth`; also returns the
    /// total mass of the cells left unresolved (an error bound).
    pub fn interval_mass_truncated(&self, lo: f64, hi: f64, max_depth: usize) -> (f64, f64) {
        if hi <= lo {
            return (0.0, 0.0);
        }
        let mut total = 0.0;
        let mut unresolved = 0.0;
        let mut stack = vec![self.root()];
        while let Some(cell) = stack.pop() {
            let (a, b) = self.bounds(&cell);
            if b <= lo || a >= hi {
                continue;
            }
            if a >= lo && b <= hi {
                total += cell.mass;
                continue;
            }
            if cell.mass < MASS_RESOLUTION || cell.depth >= max_depth {
                let overlap = (b.min(hi) - a.max(lo)).max(0.0);
                total += cell.mass * overlap / (b - a);
                unresolved += cell.mass;
                continue;
            }
            stack.extend(self.children(cell));
        }
        (total, unresolved)
    }

    /// Endpoints of the IFS cells meeting `[lo, hi]`, refined level by level
    /// until cells are at most `min_width` wide or `cap` cells are reached.
    pub fn cell_edges(&self, lo: f64, hi: f64, min_width: f64, cap: usize) -> Vec<f64> {
        let meets = |c: &Cell| {
            let (a, b) = self.bounds(c);
            b >= lo && a <= hi
        };
        let mut level: Vec<Cell> = vec![self.root()].into_iter().filter(|c| meets(c)).collect();
        while let Some(c) = level.first() {
            let (a, b) = self.bounds(c);
            if b - a <= min_width || c.depth >= MAX_DEPTH || level.len() * self.maps.len() > cap {
                break;
            }
            level = level
                .iter()
                .flat_map(|&c| self.children(c))
                .filter(|c| meets(c))
                .collect();
        }
        level
            .iter()
            .flat_map(|c| {
                let (a, b) = self.bounds(c);
                [a, b]
            })
            .collect()
    }

    /// `∫ k dμ` over the component, optionally restricted to a window.
    pub fn integrate<K: Kernel + ?Sized>(&self, kernel: &K, window: Option<Window>, eta: f64) -> f64 {
        let m = self.moments;
        let mut total = 0.0;
        let mut stack = vec![self.root()];
        while let Some(cell) = stack.pop() {
            let (a, b) = self.bounds(&cell);
            let width = b - a;
            if let Some(w) = window {
                if b <= w.lo || a >= w.hi {
                    continue;
                }
                let inside = a >= w.lo && b <= w.hi;
                if !inside {
                    if cell.mass < MASS_RESOLUTION * self.total_mass || cell.depth >= MAX_DEPTH {
                        let (ca, cb) = (a.max(w.lo), b.min(w.hi));
                        let overlap = (cb - ca).max(0.0);
                        total += cell.mass * (overlap / width) * kernel.value(0.5 * (ca + cb));
                    } else {
                        stack.extend(self.children(cell));
                    }
                    continue;
                }
            }
            let center = cell.scale * m.mean + cell.offset;
            let dist = kernel.singular_distance(center);
            if width <= eta * dist || cell.depth >= MAX_DEPTH {
                let d = kernel.taylor(center, 0.25 * width);
                let var = cell.scale * cell.scale * m.var;
                let third = cell.scale * cell.scale * cell.scale * m.third;
                total += cell.mass * (d[0] + 0.5 * d[2] * var + d[3] * third / 6.0);
            } else {
                stack.extend(self.children(cell));
            }
        }
        total
    }
}

fn base_moments(maps: &[(f64, f64)], weights: &[f64]) -> BaseMoments {
    // Invariance: E[g(t)] = Σ w_i E[g(r_i t + o_i)], solved order by order.
    let s = |k: i32| -> f64 {
        maps.iter()
            .zip(weights)
            .map(|(&(r, _), &w)| w * r.powi(k))
            .sum()
    };
    let m1 = maps.iter().zip(weights).map(|(&(_, o), &w)| w * o).sum::<f64>() / (1.0 - s(1));
    let m2 = maps
        .iter()
        .zip(weights)
        .map(|(&(r, o), &w)| w * (2.0 * r * o * m1 + o * o))
        .sum::<f64>()
        / (1.0 - s(2));
    let m3 = maps
        .iter()
        .zip(weights)
        .map(|(&(r, o), &w)| w * (3.0 * r * r * o * m2 + 3.0 * r * o * o * m1 + o * o * o))
        .sum::<f64>()
        / (1.0 - s(3));
    BaseMoments {
        mean: m1,
        var: (m2 - m1 * m1).max(0.0),
        third: m3 - 3.0 * m1 * m2 + 2.0 * m1 * m1 * m1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Moment(i32);
    impl Kernel for Moment {
        fn value(&self, t: f64) -> f64 {
            t.powi(self.0)
        }
        fn singular_distance(&self, _t: f64) -> f64 {
            1.0
        }
    }

    #[test]
    fn cantor_moments() {
        let c = SelfSimilarComponent::cantor();
        assert!((c.moments.mean - 0.5).abs() < 1e-15);
        assert!((c.moments.var - 0.125).abs() < 1e-15);
        assert!(c.moments.third.abs() < 1e-15);
    }

    #[test]
    fn cantor_second_moment_integral() {
        // E[t²] = var + mean² = 1/8 + 1/4
        let c = SelfSimilarComponent::cantor();
        let v = c.integrate(&Moment(2), None, DEFAULT_ETA);
        assert!((v - 0.375).abs() < 1e-12, "{v}");
    }

    #[test]
    fn cantor_window_masses() {
        let c = SelfSimilarComponent::cantor();
        assert!((c.interval_mass(0.0, 1.0 / 3.0) - 0.5).abs() < 1e-12);
        assert!((c.interval_mass(-1.0, 1.0 / 9.0) - 0.25).abs() < 1e-12);
        assert!((c.interval_mass(1.0 / 3.0, 2.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn truncation_error_bound_is_honest() {
        let c = SelfSimilarComponent::cantor();
        let exact = c.interval_mass(0.1, 0.7);
        for d in 1..20 {
            let (m, err) = c.interval_mass_truncated(0.1, 0.7, d);
            let (m1, _) = c.interval_mass_truncated(0.1, 0.7, d + 1);
            assert!((m - exact).abs() <= err + 1e-15);
            assert!((m - m1).abs() <= err + 1e-15);
        }
    }

    #[test]
    fn rejects_overlapping_images() {
        let r = SelfSimilarComponent::new(
            vec![(0.6, 0.0), (0.6, 0.4)],
            vec![0.5, 0.5],
            (0.0, 1.0),
            1.0,
        );
        assert!(r.is_err());
    }

    #[test]
    fn rejects_bad_weights() {
        let r = SelfSimilarComponent::new(
            vec![(0.3, 0.0), (0.3, 0.7)],
            vec![0.5, 0.6],
            (0.0, 1.0),
            1.0,
        );
        assert!(r.is_err());
    }
}
