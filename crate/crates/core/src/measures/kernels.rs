//! Integration kernels used against Nevanlinna measures.

use num_complex::Complex64;

use super::Kernel;

/// Poisson kernel `y / ((t − x)² + y²) = Im 1/(t − z)`.
#[derive(Debug, Clone, Copy)]
pub struct PoissonKernel {
    pub z: Complex64,
}

impl Kernel for PoissonKernel {
    fn value(&self, t: f64) -> f64 {
        let dx = t - self.z.re;
        let y = self.z.im;
        y / (dx * dx + y * y)
    }

    fn taylor(&self, t: f64, _h: f64) -> [f64; 4] {
        let w = 1.0 / (Complex64::new(t, 0.0) - self.z);
        let w2 = w * w;
        [
            self.value(t),
            (-w2).im,
            (2.0 * w2 * w).im,
            (-6.0 * w2 * w2).im,
        ]
    }

    fn singular_distance(&self, t: f64) -> f64 {
        (Complex64::new(t, 0.0) - self.z).norm()
    }

    fn peaks(&self) -> Vec<f64> {
        vec![self.z.re]
    }
}

/// Real part of the Nevanlinna kernel, `Re 1/(t − z) − t/(1 + t²)`.
#[derive(Debug, Clone, Copy)]
pub struct CauchyRealKernel {
    pub z: Complex64,
}

impl Kernel for CauchyRealKernel {
    fn value(&self, t: f64) -> f64 {
        let dx = t - self.z.re;
        let y = self.z.im;
        dx / (dx * dx + y * y) - t / (1.0 + t * t)
    }

    fn taylor(&self, t: f64, _h: f64) -> [f64; 4] {
        let tc = Complex64::new(t, 0.0);
        let w = 1.0 / (tc - self.z);
        let v = 1.0 / (tc - Complex64::i());
        let (w2, v2) = (w * w, v * v);
        [
            self.value(t),
            (-w2).re + v2.re,
            (2.0 * w2 * w).re - (2.0 * v2 * v).re,
            (-6.0 * w2 * w2).re + (6.0 * v2 * v2).re,
        ]
    }

    fn singular_distance(&self, t: f64) -> f64 {
        let tc = Complex64::new(t, 0.0);
        (tc - self.z).norm().min((tc - Complex64::i()).norm())
    }

    fn peaks(&self) -> Vec<f64> {
        vec![self.z.re, 0.0]
    }
}

/// `∫_a^b λ/((x − t)² + λ²) dx = arctan((b − t)/λ) − arctan((a − t)/λ)`,
/// the horizontal-segment average of the Poisson kernel.
#[derive(Debug, Clone, Copy)]
pub struct ArctanWindowKernel {
    pub a: f64,
    pub b: f64,
    pub height: f64,
}

impl Kernel for ArctanWindowKernel {
    fn value(&self, t: f64) -> f64 {
        // arctan p − arctan q = atan2(p − q, 1 + pq), scaled by λ² to avoid overflow
        let l = self.height;
        (l * (self.b - self.a)).atan2(l * l + (self.b - t) * (self.a - t))
    }

    fn taylor(&self, t: f64, _h: f64) -> [f64; 4] {
        let tc = Complex64::new(t, 0.0);
        let ua = 1.0 / (tc - Complex64::new(self.a, self.height));
        let ub = 1.0 / (tc - Complex64::new(self.b, self.height));
        let (ua2, ub2) = (ua * ua, ub * ub);
        [
            self.value(t),
            (ua - ub).im,
            (-ua2 + ub2).im,
            (2.0 * ua2 * ua - 2.0 * ub2 * ub).im,
        ]
    }

    fn singular_distance(&self, t: f64) -> f64 {
        let tc = Complex64::new(t, 0.0);
        (tc - Complex64::new(self.a, self.height))
            .norm()
            .min((tc - Complex64::new(self.b, self.height)).norm())
    }

    fn peaks(&self) -> Vec<f64> {
        vec![self.a, self.b]
    }
}

/// Wraps a plain function with a known singular point set.
pub struct FnKernel<F: Fn(f64) -> f64 + Sync> {
    pub f: F,
    pub singular_points: Vec<f64>,
}

impl<F: Fn(f64) -> f64 + Sync> Kernel for FnKernel<F> {
    fn value(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    fn singular_distance(&self, t: f64) -> f64 {
        self.singular_points
            .iter()
            .map(|p| (t - p).abs())
            .fold(f64::INFINITY, f64::min)
    }

    fn peaks(&self) -> Vec<f64> {
        self.singular_points.clone()
    }
}
