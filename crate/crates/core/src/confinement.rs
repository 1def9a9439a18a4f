//! Static confinement: a precomputed field of the kernel-gradient sum over the
//! exterior of the body, completing the truncated support of particles near
//! the surface.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::kernel::Kernel;
use crate::levelset::{DataPackage, LevelSetField};
use crate::{Error, Point, Result, Vector};

/// Parameters of the completion field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompletionSettings {
    /// Kernel smoothing length; the support radius is `2h`.
    pub h: f64,
    /// Heaviside smoothing half-width.
    pub epsilon: f64,
}

/// Smoothed Heaviside: 0 below `−ε`, 1 above `ε`,
/// `½ + φ/2ε + sin(πφ/ε)/2π` in between.
pub fn heaviside(phi: f64, epsilon: f64) -> f64 {
    if phi < -epsilon {
        0.0
    } else if phi > epsilon {
        1.0
    } else {
        0.5 + phi / (2.0 * epsilon) + (PI * phi / epsilon).sin() / (2.0 * PI)
    }
}

/// Level range `[T_n, T_p]` of cells carrying a completion vector.
pub fn active_band(cutoff: f64, lf: f64) -> (f64, f64) {
    (-(cutoff + lf), lf)
}

/// Fills every package cell's completion vector with
/// `Σ_c H(φ_c, ε) l_f^d ∇_a W(r_a − r_c)` over fine cells `c` within the kernel
/// support and with `φ_c > −ε`. Cells outside the active band get zero.
pub fn compute_completion<const D: usize>(field: &mut LevelSetField<D>, settings: &CompletionSettings) -> Result<()> {
    let kernel = Kernel::<D>::new(settings.h);
    let rc = kernel.cutoff();
    if rc > 4.0 * field.lc() {
        return Err(Error::Configuration(format!(
            "kernel support {rc} exceeds the far-field distance 4·l_c = {}",
            4.0 * field.lc()
        )));
    }
    if settings.epsilon.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::Configuration("heaviside width must be positive".into()));
    }
    let lf = field.lf();
    let volume = lf.powi(D as i32);
    let reach = (rc / lf).ceil() as i64;
    let stencil: Vec<([i64; D], Vector<D>)> = crate::levelset::index::offsets::<D>(-reach, reach)
        .filter_map(|off| {
            // vector from the contributing cell to the target
            let rac = Vector::<D>::from_fn(|k, _| -(off[k] as f64) * lf);
            let r = rac.norm();
            (r > 0.0 && r < rc).then(|| (off, kernel.gradient(&rac) * volume))
        })
        .collect();
    let (t_n, t_p) = active_band(rc, lf);
    let eps = settings.epsilon;
    let frozen: &LevelSetField<D> = field;
    let completion: Vec<Vec<Vector<D>>> = frozen
        .packages()
        .par_iter()
        .map(|pkg| {
            (0..DataPackage::<D>::CELLS)
                .map(|l| {
                    let phi = pkg.phi[l];
                    if !(t_n..=t_p).contains(&phi) {
                        return Vector::zeros();
                    }
                    let g = pkg.fine_index(l);
                    let mut acc = Vector::<D>::zeros();
                    for (off, grad) in &stencil {
                        let phi_c = frozen.phi_at(crate::levelset::index::add(g, *off));
                        if phi_c > -eps {
                            acc += grad * heaviside(phi_c, eps);
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect();
    for (pkg, c) in field.packages_mut().iter_mut().zip(completion) {
        pkg.completion = c;
    }
    Ok(())
}

/// Interpolated completion vector at `p`; zero outside the domain or band.
pub fn probe_completion<const D: usize>(field: &LevelSetField<D>, p: &Point<D>) -> Vector<D> {
    field.probe_completion(p)
}
