//! Wendland C2 smoothing kernel.

use std::f64::consts::PI;

use crate::Vector;

/// Ratio of smoothing length to particle spacing.
pub const SMOOTHING_RATIO: f64 = 1.3;

/// Wendland C2 kernel `W = α (1 − q/2)^4 (2q + 1)` for `q = r/h < 2`, with
/// support radius `r_c = 2h`. Defined for two and three dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel<const D: usize> {
    h: f64,
    alpha: f64,
}

impl<const D: usize> Kernel<D> {
    pub fn new(h: f64) -> Self {
        assert!(h > 0.0 && h.is_finite(), "smoothing length must be positive");
        let alpha = match D {
            2 => 7.0 / (4.0 * PI * h * h),
            3 => 21.0 / (16.0 * PI * h * h * h),
            _ => panic!("the Wendland C2 kernel is implemented for 2D and 3D only"),
        };
        Self { h, alpha }
    }

    /// Kernel for particle spacing `dx` with `h = 1.3 dx`.
    pub fn for_spacing(dx: f64) -> Self {
        Self::new(SMOOTHING_RATIO * dx)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn cutoff(&self) -> f64 {
        2.0 * self.h
    }

    pub fn value(&self, r: f64) -> f64 {
        let q = r / self.h;
        if q >= 2.0 {
            return 0.0;
        }
        let s = 1.0 - 0.5 * q;
        self.alpha * s.powi(4) * (2.0 * q + 1.0)
    }

    /// `dW/dr`, non-positive.
    pub fn derivative(&self, r: f64) -> f64 {
        let q = r / self.h;
        if q >= 2.0 {
            return 0.0;
        }
        let s = 1.0 - 0.5 * q;
        -5.0 * self.alpha / self.h * q * s.powi(3)
    }

    /// `∇_a W(|r_a − r_b|)` for `rab = r_a − r_b`; zero at coincident points.
    pub fn gradient(&self, rab: &Vector<D>) -> Vector<D> {
        let r = rab.norm();
        if r == 0.0 || r >= self.cutoff() {
            return Vector::zeros();
        }
        rab * (self.derivative(r) / r)
    }
}
