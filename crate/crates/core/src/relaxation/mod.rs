//! Physics-driven particle relaxation.
//!
//! Particles seeded on a lattice inside the body are pushed apart by a constant
//! background pressure. Positions advance by `½ F Δt²` with no carried
//! velocity; particles that drift within half a spacing of the surface are
//! projected back along the normal. Optionally a precomputed completion field
//! supplies the missing exterior part of each near-surface particle's kernel sum.

mod diagnostics;
mod neighbors;
mod output;

pub use diagnostics::{DiagnosticsSeries, StepRecord, PLATEAU_TOLERANCE, PLATEAU_WINDOW};
pub use neighbors::neighbor_lists;
pub use output::{write_csv, write_vtk};

use rayon::prelude::*;

use crate::kernel::Kernel;
use crate::levelset::LevelSetField;
use crate::{Error, Point, Result, Vector};

pub const DEFAULT_ITERATIONS: usize = 1000;
/// Time step used when every force vanishes.
pub const DEFAULT_DT_MAX: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet<const D: usize> {
    pub positions: Vec<Point<D>>,
    /// Nominal spacing `Δx`.
    pub dx: f64,
    /// Per-particle volume `Δx^d`.
    pub volume: f64,
    /// Per-particle mass `ρ₀ V` with `ρ₀ = 1`.
    pub mass: f64,
    /// Acceleration of each particle from the last force evaluation.
    pub forces: Vec<Vector<D>>,
    /// Neighbours within the kernel support, ascending.
    pub neighbors: Vec<Vec<usize>>,
}

impl<const D: usize> ParticleSet<D> {
    pub fn new(positions: Vec<Point<D>>, dx: f64) -> Self {
        let volume = dx.powi(D as i32);
        let n = positions.len();
        Self {
            positions,
            dx,
            volume,
            mass: volume,
            forces: vec![Vector::zeros(); n],
            neighbors: vec![Vec::new(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn update_neighbors(&mut self, cutoff: f64) {
        self.neighbors = neighbor_lists(&self.positions, cutoff);
    }

    /// Kernel-weighted number density `Σ_b W_ab V_b` (self term included).
    pub fn number_density(&self, kernel: &Kernel<D>) -> Vec<f64> {
        (0..self.len())
            .map(|a| {
                let mut s = kernel.value(0.0) * self.volume;
                for &b in &self.neighbors[a] {
                    s += kernel.value((self.positions[a] - self.positions[b]).norm()) * self.volume;
                }
                s
            })
            .collect()
    }
}

/// Particles at lattice points `origin + (k + ½) Δx` of the field domain where
/// the level set is negative.
pub fn lattice_seed<const D: usize>(field: &LevelSetField<D>, dx: f64) -> Result<ParticleSet<D>> {
    if !(dx.is_finite() && dx > 0.0) {
        return Err(Error::Configuration(format!("particle spacing must be positive, got {dx}")));
    }
    let domain = field.domain();
    let counts: [usize; D] = std::array::from_fn(|k| ((domain.max[k] - domain.min[k]) / dx).floor() as usize);
    let total: usize = counts.iter().product();
    let row = counts[0].max(1);
    let rows = total / row;
    let positions: Vec<Point<D>> = (0..rows)
        .into_par_iter()
        .flat_map_iter(|r| {
            let mut rest = r;
            let mut idx = [0usize; D];
            for k in 1..D {
                idx[k] = rest % counts[k];
                rest /= counts[k];
            }
            (0..counts[0]).filter_map(move |i| {
                let mut ijk = idx;
                ijk[0] = i;
                let p = Point::<D>::from_fn(|k, _| domain.min[k] + (ijk[k] as f64 + 0.5) * dx);
                match field.probe_phi(&p) {
                    Ok(phi) if phi < 0.0 => Some(p),
                    _ => None,
                }
            })
        })
        .collect();
    if positions.is_empty() {
        return Err(Error::EmptySeed { spacing: dx });
    }
    Ok(ParticleSet::new(positions, dx))
}

/// Fills `ps.forces` with `−2 p₀ (V/m) (Σ_b ∇_a W_ab V_b + I(r_a))`, the
/// completion term `I` only when `use_confinement` is set. Neighbour lists must
/// be current.
pub fn compute_forces<const D: usize>(
    ps: &mut ParticleSet<D>,
    field: &LevelSetField<D>,
    kernel: &Kernel<D>,
    use_confinement: bool,
    p0: f64,
) {
    let prefactor = -2.0 * p0 * ps.volume / ps.mass;
    let ps_ref: &ParticleSet<D> = ps;
    let forces: Vec<Vector<D>> = (0..ps_ref.len())
        .into_par_iter()
        .map(|a| {
            let ra = ps_ref.positions[a];
            let mut sum = Vector::<D>::zeros();
            for &b in &ps_ref.neighbors[a] {
                sum += kernel.gradient(&(ra - ps_ref.positions[b])) * ps_ref.volume;
            }
            if use_confinement {
                sum += field.probe_completion(&ra);
            }
            sum * prefactor
        })
        .collect();
    ps.forces = forces;
}

/// Time step `0.25 √(h / max|F|)`, capped at `dt_max`.
pub fn time_step(h: f64, max_force: f64, dt_max: f64) -> f64 {
    if max_force > 0.0 {
        (0.25 * (h / max_force).sqrt()).min(dt_max)
    } else {
        dt_max
    }
}

/// Moves `p` to depth `½Δx` along the inward normal if it lies above that
/// depth. Returns whether it was moved.
pub fn bound_particle<const D: usize>(field: &LevelSetField<D>, p: &mut Point<D>, dx: f64) -> Result<bool> {
    let phi = field.probe_phi(p)?;
    if phi < -0.5 * dx {
        return Ok(false);
    }
    let n = field.probe_normal(p)?;
    *p -= n * (phi + 0.5 * dx);
    Ok(true)
}

/// Advances positions by `½ F Δt²` with the global time step, then bounds them.
/// Forces must be current.
pub fn step<const D: usize>(
    ps: &mut ParticleSet<D>,
    field: &LevelSetField<D>,
    kernel: &Kernel<D>,
    dt_max: f64,
) -> Result<StepRecord> {
    let max_force = ps.forces.iter().map(|f| f.norm()).fold(0.0, f64::max);
    let dt = time_step(kernel.h(), max_force, dt_max);
    let dx = ps.dx;
    let domain = field.domain();
    let moved: Vec<Result<(Point<D>, bool)>> = ps
        .positions
        .par_iter()
        .zip(&ps.forces)
        .enumerate()
        .map(|(i, (r, f))| {
            let mut p = r + f * (0.5 * dt * dt);
            let escaped = |p: &Point<D>| Error::ParticleEscaped {
                index: i,
                position: p.iter().copied().collect(),
            };
            if !domain.contains_point(&p) {
                return Err(escaped(&p));
            }
            let before = p;
            let bounded = bound_particle(field, &mut p, dx).map_err(|e| match e {
                Error::OutOfDomain(_) => escaped(&before),
                other => other,
            })?;
            if !domain.contains_point(&p) {
                return Err(escaped(&p));
            }
            Ok((p, bounded))
        })
        .collect();
    let mut kinetic = 0.0;
    let mut max_disp: f64 = 0.0;
    let mut bounded_count = 0;
    for (i, m) in moved.into_iter().enumerate() {
        let (p, bounded) = m?;
        let disp = (p - ps.positions[i]).norm();
        kinetic += 0.5 * ps.mass * (disp / dt).powi(2);
        max_disp = max_disp.max(disp);
        bounded_count += usize::from(bounded);
        ps.positions[i] = p;
    }
    Ok(StepRecord {
        dt,
        avg_kinetic_energy: kinetic / ps.len().max(1) as f64,
        max_disp,
        bounded_count,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxConfig {
    pub iterations: usize,
    pub use_confinement: bool,
    pub p0: f64,
    pub dt_max: f64,
}

impl Default for RelaxConfig {
    fn default() -> Self {
        Self {
            iterations: DEFAULT_ITERATIONS,
            use_confinement: false,
            p0: 1.0,
            dt_max: DEFAULT_DT_MAX,
        }
    }
}

/// Runs the relaxation loop. With confinement the field's completion vectors
/// must already be computed for `kernel`.
pub fn relax<const D: usize>(
    ps: &mut ParticleSet<D>,
    field: &LevelSetField<D>,
    kernel: &Kernel<D>,
    config: &RelaxConfig,
) -> Result<DiagnosticsSeries> {
    let mut series = DiagnosticsSeries::default();
    relax_with(ps, field, kernel, config, |_, record| series.records.push(*record))?;
    Ok(series)
}

/// [`relax`] with a callback after every iteration.
pub fn relax_with<const D: usize>(
    ps: &mut ParticleSet<D>,
    field: &LevelSetField<D>,
    kernel: &Kernel<D>,
    config: &RelaxConfig,
    mut observe: impl FnMut(usize, &StepRecord),
) -> Result<()> {
    for iter in 0..config.iterations {
        ps.update_neighbors(kernel.cutoff());
        compute_forces(ps, field, kernel, config.use_confinement, config.p0);
        let record = step(ps, field, kernel, config.dt_max)?;
        observe(iter + 1, &record);
    }
    ps.update_neighbors(kernel.cutoff());
    Ok(())
}

#[cfg(test)]
mod tests;
