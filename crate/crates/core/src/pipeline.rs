//! End-to-end run: load → build field → clean → completion → seed → relax →
//! write artifacts.
//!
//! Artifacts are written into `output.dir` as they become available. If a
//! later stage fails, everything already written is renamed with an
//! `.incomplete` suffix.

use std::path::{Path, PathBuf};

use log::{info, warn};

use crate::builtin::builtin_geometry;
use crate::cleaner::{clean, CleanOptions, CleanReport};
use crate::config::{GeometrySource, PipelineConfig};
use crate::confinement::{compute_completion, CompletionSettings};
use crate::geometry::io::{load_surface, SurfaceFormat};
use crate::geometry::{Aabb, Surface, SurfaceGeometry};
use crate::kernel::Kernel;
use crate::levelset::{write_dump, LevelSetField};
use crate::relaxation::{lattice_seed, relax_with, write_csv, write_vtk, DiagnosticsSeries, RelaxConfig};
use crate::{Error, Point, Result};

pub const RESOLVED_CONFIG_FILE: &str = "config.resolved.txt";
pub const FIELD_FILE: &str = "levelset.txt";
pub const CLEAN_REPORT_FILE: &str = "clean_report.txt";
pub const PARTICLES_CSV_FILE: &str = "particles.csv";
pub const PARTICLES_VTK_FILE: &str = "particles.vtk";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const INCOMPLETE_SUFFIX: &str = ".incomplete";

/// Warning emitted when the kinetic-energy plateau is never reached.
pub const NOT_CONVERGED_WARNING: &str = "convergence criterion not met";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// Every stage through relaxation.
    Full,
    /// Stop after cleaning; writes the field and the clean report.
    CleanOnly,
}

#[derive(Debug, Clone, Default)]
pub struct PipelineOutcome {
    pub artifacts: Vec<PathBuf>,
    pub clean_report: Option<CleanReport>,
    pub particle_count: usize,
    /// First iteration at which the plateau test passed.
    pub plateau_at: Option<usize>,
    pub warnings: Vec<String>,
}

impl PipelineOutcome {
    /// Cleaning ran but stopped at its pass limit.
    pub fn cleaning_incomplete(&self) -> bool {
        self.clean_report.as_ref().is_some_and(|r| !r.complete)
    }
}

pub fn load_geometry(config: &PipelineConfig) -> Result<SurfaceGeometry> {
    match &config.source {
        GeometrySource::Builtin { name, params } => builtin_geometry(*name, params),
        GeometrySource::File { path, format } => {
            let format = match format {
                Some(f) => *f,
                None => SurfaceFormat::from_extension(path).ok_or_else(|| {
                    Error::Configuration(format!(
                        "cannot infer the format of {}; set input.format",
                        path.display()
                    ))
                })?,
            };
            load_surface(path, format)
        }
    }
}

pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineOutcome> {
    run_stage(config, Stage::Full)
}

/// Runs the pipeline up to `stage` on a thread pool sized by `config.threads`.
pub fn run_stage(config: &PipelineConfig, stage: Stage) -> Result<PipelineOutcome> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::Configuration(format!("cannot start {} worker threads: {e}", config.threads)))?;
    pool.install(|| {
        let geometry = load_geometry(config)?;
        let mut writer = ArtifactWriter::new(&config.output_dir);
        let result = match &geometry {
            SurfaceGeometry::Planar(p) => run_dim::<2, _>(p, config, stage, &mut writer),
            SurfaceGeometry::Solid(m) => run_dim::<3, _>(m, config, stage, &mut writer),
        };
        match result {
            Ok(mut outcome) => {
                outcome.artifacts = writer.written;
                Ok(outcome)
            }
            Err(e) => {
                writer.mark_incomplete();
                Err(e)
            }
        }
    })
}

fn domain_for<const D: usize, S: Surface<D>>(surface: &S, config: &PipelineConfig) -> Result<Aabb<D>> {
    match &config.domain {
        None => Ok(LevelSetField::default_domain(surface, config.lc())),
        Some((min, max)) => {
            if min.len() != D {
                return Err(Error::Configuration(format!(
                    "domain has {} axes but the geometry is {D}D",
                    min.len()
                )));
            }
            Ok(Aabb::new(Point::<D>::from_column_slice(min), Point::<D>::from_column_slice(max)))
        }
    }
}

fn run_dim<const D: usize, S: Surface<D>>(
    surface: &S,
    config: &PipelineConfig,
    stage: Stage,
    writer: &mut ArtifactWriter,
) -> Result<PipelineOutcome> {
    let mut outcome = PipelineOutcome::default();
    let domain = domain_for(surface, config)?;
    writer.create_dir()?;
    writer.write(
        RESOLVED_CONFIG_FILE,
        config
            .resolved_text((domain.min.as_slice(), domain.max.as_slice()))
            .as_bytes(),
    )?;

    let lc = config.lc();
    let mut field = LevelSetField::build(surface, domain, lc)?;
    let reinit = field.reinitialize(config.reinit_iters);
    info!(
        "level set: {} stored fine cells, reinit residual {} after {} sweeps",
        field.stored_fine_cell_count(),
        reinit.residual,
        reinit.iterations
    );

    let kernel = Kernel::<D>::for_spacing(config.dx);
    let completion = CompletionSettings {
        h: kernel.h(),
        epsilon: config.confinement_epsilon(),
    };

    if config.clean {
        let options = CleanOptions {
            epsilon: config.clean_epsilon(),
            d_limit: config.d_limit(),
            window_radius: config.window_radius as i64,
            max_passes: config.max_passes,
            reinit_iters: config.reinit_iters,
            completion: None,
        };
        let report = clean(&mut field, &options)?;
        writer.write(CLEAN_REPORT_FILE, report.to_table().as_bytes())?;
        if !report.complete {
            let msg = format!(
                "cleaning stopped after {} passes with {} unresolved cells",
                report.passes.len(),
                report.final_non_resolved()
            );
            warn!("{msg}");
            outcome.warnings.push(msg);
        }
        outcome.clean_report = Some(report);
    }

    if stage == Stage::CleanOnly {
        writer.write(FIELD_FILE, write_dump(&field).as_bytes())?;
        return Ok(outcome);
    }

    if config.confinement {
        compute_completion(&mut field, &completion)?;
    }
    writer.write(FIELD_FILE, write_dump(&field).as_bytes())?;

    let mut ps = lattice_seed(&field, config.dx)?;
    info!("seeded {} particles", ps.len());
    let relax_config = RelaxConfig {
        iterations: config.iterations,
        use_confinement: config.confinement,
        p0: config.p0,
        dt_max: config.dt_max,
    };
    let mut series = DiagnosticsSeries::default();
    let relaxed = relax_with(&mut ps, &field, &kernel, &relax_config, |_, r| series.records.push(*r));
    writer.write(DIAGNOSTICS_FILE, series.to_csv().as_bytes())?;
    writer.write(PARTICLES_CSV_FILE, write_csv(&ps).as_bytes())?;
    writer.write(PARTICLES_VTK_FILE, write_vtk(&ps).as_bytes())?;
    relaxed?;

    outcome.particle_count = ps.len();
    outcome.plateau_at = series.first_plateau(crate::relaxation::PLATEAU_WINDOW, crate::relaxation::PLATEAU_TOLERANCE);
    if config.iterations > 0 && outcome.plateau_at.is_none() {
        warn!("{NOT_CONVERGED_WARNING}");
        outcome.warnings.push(NOT_CONVERGED_WARNING.to_string());
    }
    Ok(outcome)
}

struct ArtifactWriter {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl ArtifactWriter {
    fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        }
    }

    fn create_dir(&self) -> Result<()> {
        std::fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    fn mark_incomplete(&self) {
        for path in &self.written {
            let mut target = path.clone().into_os_string();
            target.push(INCOMPLETE_SUFFIX);
            if let Err(e) = std::fs::rename(path, &target) {
                warn!("could not rename {}: {e}", path.display());
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::{BuiltinName, BuiltinParams};

    fn small_circle(dir: &Path) -> PipelineConfig {
        PipelineConfig {
            source: GeometrySource::Builtin {
                name: BuiltinName::Circle,
                params: BuiltinParams::new().with("radius", 0.5),
            },
            dx: 0.05,
            iterations: 20,
            output_dir: dir.to_path_buf(),
            ..PipelineConfig::default()
        }
    }

    #[test]
    fn writes_all_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let outcome = run_pipeline(&small_circle(dir.path())).unwrap();
        for name in [
            RESOLVED_CONFIG_FILE,
            FIELD_FILE,
            CLEAN_REPORT_FILE,
            PARTICLES_CSV_FILE,
            PARTICLES_VTK_FILE,
            DIAGNOSTICS_FILE,
        ] {
            assert!(dir.path().join(name).is_file(), "{name}");
        }
        assert_eq!(outcome.artifacts.len(), 6);
        assert!(outcome.particle_count > 300);
        let csv = std::fs::read_to_string(dir.path().join(DIAGNOSTICS_FILE)).unwrap();
        assert_eq!(csv.lines().count(), 21);
    }

    #[test]
    fn clean_only_stops_after_cleaning() {
        let dir = tempfile::tempdir().unwrap();
        let outcome = run_stage(&small_circle(dir.path()), Stage::CleanOnly).unwrap();
        assert!(outcome.clean_report.unwrap().already_clean());
        assert!(dir.path().join(FIELD_FILE).is_file());
        assert!(!dir.path().join(PARTICLES_CSV_FILE).exists());
    }

    #[test]
    fn missing_input_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out");
        let config = PipelineConfig {
            source: GeometrySource::File {
                path: dir.path().join("absent.stl"),
                format: None,
            },
            output_dir: out.clone(),
            ..PipelineConfig::default()
        };
        let err = run_pipeline(&config).unwrap_err();
        assert!(matches!(err, Error::Io { .. }), "{err}");
        assert!(!out.exists());
    }

    #[test]
    fn failure_marks_artifacts_incomplete() {
        let dir = tempfile::tempdir().unwrap();
        // a spacing far larger than the body seeds nothing
        let config = PipelineConfig {
            dx: 0.05,
            lc: Some(0.05),
            confinement: false,
            ..small_circle(dir.path())
        };
        let config = PipelineConfig {
            source: GeometrySource::Builtin {
                name: BuiltinName::Circle,
                params: BuiltinParams::new().with("radius", 0.01),
            },
            ..config
        };
        let err = run_pipeline(&PipelineConfig { dx: 1.0, ..config }).unwrap_err();
        assert!(matches!(err, Error::EmptySeed { .. }), "{err}");
        let incomplete = dir.path().join(format!("{RESOLVED_CONFIG_FILE}{INCOMPLETE_SUFFIX}"));
        assert!(incomplete.is_file());
        assert!(!dir.path().join(RESOLVED_CONFIG_FILE).exists());
    }

    #[test]
    fn domain_dimension_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let config = PipelineConfig {
            domain: Some((vec![-1.0; 3], vec![1.0; 3])),
            ..small_circle(dir.path())
        };
        assert!(matches!(run_pipeline(&config), Err(Error::Configuration(_))));
    }
}
