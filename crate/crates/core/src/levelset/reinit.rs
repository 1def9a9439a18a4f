use rayon::prelude::*;

use super::index::{add, unit, unravel};
use super::{DataPackage, LevelSetField, PACKAGE_SIZE};

/// Band residual below which reinitialisation stops.
pub const REINIT_TOLERANCE: f64 = 0.05;
pub const DEFAULT_REINIT_ITERS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReinitOutcome {
    /// Pseudo-time sweeps performed.
    pub iterations: usize,
    /// Max band `||∇φ| − 1|` after the last sweep.
    pub residual: f64,
}

impl<const D: usize> LevelSetField<D> {
    /// Drives φ towards a signed distance by iterating
    /// `φ_τ + S(φ₀)(|∇φ| − 1) = 0` over all package cells.
    ///
    /// First-order Godunov upwinding, `Δτ = l_f / 2`, smoothed sign
    /// `S(φ₀) = φ₀ / √(φ₀² + l_f²)` frozen at entry. Each sweep reads a snapshot of
    /// the whole field (halos included) and writes a fresh buffer. Stops when the
    /// residual drops below [`REINIT_TOLERANCE`] or after `max_iters` sweeps.
    pub fn reinitialize(&mut self, max_iters: usize) -> ReinitOutcome {
        let lf = self.lf;
        let dt = 0.5 * lf;
        let sign: Vec<Vec<f64>> = self
            .packages
            .iter()
            .map(|pkg| pkg.phi.iter().map(|&p| p / (p * p + lf * lf).sqrt()).collect())
            .collect();

        let mut iterations = 0;
        loop {
            let residual = self.eikonal_residual();
            if residual < REINIT_TOLERANCE || iterations >= max_iters {
                return ReinitOutcome {
                    iterations,
                    residual,
                };
            }
            let updated: Vec<Vec<f64>> = (0..self.packages.len())
                .into_par_iter()
                .map(|p| {
                    (0..DataPackage::<D>::CELLS)
                        .map(|l| self.godunov_update(p, l, sign[p][l], dt))
                        .collect()
                })
                .collect();
            for (pkg, phi) in self.packages.iter_mut().zip(updated) {
                pkg.phi = phi;
            }
            iterations += 1;
        }
    }

    fn godunov_update(&self, package: usize, local: usize, s: f64, dt: f64) -> f64 {
        let lf = self.lf;
        let rel = unravel::<D>(local, PACKAGE_SIZE).map(|c| c as i64);
        let phi = self.packages[package].phi[local];
        let mut grad2 = 0.0;
        for k in 0..D {
            let minus = self.value_of(self.locate_in_halo(package, add(rel, unit(k, -1))));
            let plus = self.value_of(self.locate_in_halo(package, add(rel, unit(k, 1))));
            let backward = (phi - minus) / lf;
            let forward = (plus - phi) / lf;
            grad2 += if s > 0.0 {
                backward.max(0.0).powi(2).max(forward.min(0.0).powi(2))
            } else {
                backward.min(0.0).powi(2).max(forward.max(0.0).powi(2))
            };
        }
        phi - dt * s * (grad2.sqrt() - 1.0)
    }
}
