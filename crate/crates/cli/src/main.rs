use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use particle_prep::builtin::{builtin_geometry, BuiltinName, BuiltinParams};
use particle_prep::config::PipelineConfig;
use particle_prep::geometry::io::save_surface;
use particle_prep::pipeline::{run_stage, PipelineOutcome, Stage};
use particle_prep::Error;

/// Exit status when cleaning hit its pass limit but artifacts were written.
const EXIT_NOT_CONVERGED: u8 = 5;

#[derive(Parser)]
#[command(name = "particle-prep", version, about = "Level-set geometry cleaning and particle generation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline. Any config key can be overridden with `--key value`.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
        overrides: Vec<String>,
    },
    /// Stop after cleaning and write the field and the clean report.
    CleanOnly {
        #[arg(long)]
        config: PathBuf,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
        overrides: Vec<String>,
    },
    /// Write a built-in test geometry. Shape parameters are passed as `--param value`.
    Builtin {
        #[arg(long)]
        name: String,
        /// Output file; `.csv` for 2D shapes, `.stl` or `.obj` for 3D.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--PARAM VALUE")]
        params: Vec<String>,
    },
}

/// Turns `--key value` / `--key=value` tokens into pairs.
fn flag_pairs(args: &[String]) -> Result<Vec<(String, String)>, Error> {
    let mut pairs = Vec::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let Some(key) = arg.strip_prefix("--") else {
            return Err(Error::Configuration(format!("expected --key, got '{arg}'")));
        };
        if let Some((k, v)) = key.split_once('=') {
            pairs.push((k.to_string(), v.to_string()));
        } else {
            let value = it
                .next()
                .ok_or_else(|| Error::Configuration(format!("missing value for --{key}")))?;
            pairs.push((key.to_string(), value.clone()));
        }
    }
    Ok(pairs)
}

fn load_config(path: &Path, overrides: &[String]) -> Result<PipelineConfig, Error> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    PipelineConfig::from_text(&text, &flag_pairs(overrides)?)
}

fn run(config: &Path, overrides: &[String], stage: Stage) -> Result<PipelineOutcome, Error> {
    let config = load_config(config, overrides)?;
    let outcome = run_stage(&config, stage)?;
    for path in &outcome.artifacts {
        println!("wrote {}", path.display());
    }
    if let Some(n) = outcome.plateau_at {
        println!("kinetic energy plateau reached at iteration {n}");
    }
    Ok(outcome)
}

fn write_builtin(name: &str, out: Option<&Path>, params: &[String]) -> Result<(), Error> {
    let name: BuiltinName = name.parse()?;
    let mut params = BuiltinParams(flag_pairs(params)?.into_iter().collect());
    // `--out` may follow the shape parameters
    let trailing_out = params.0.remove("out").map(PathBuf::from);
    let out = out
        .map(Path::to_path_buf)
        .or(trailing_out)
        .ok_or_else(|| Error::Configuration("builtin needs --out <file>".into()))?;
    let out = out.as_path();
    let geometry = builtin_geometry(name, &params)?;
    save_surface(&geometry, out)?;
    println!("wrote {} ({} elements)", out.display(), geometry.element_count());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config, overrides } => run(config, overrides, Stage::Full),
        Command::CleanOnly { config, overrides } => run(config, overrides, Stage::CleanOnly),
        Command::Builtin { name, out, params } => write_builtin(name, out.as_deref(), params).map(|_| PipelineOutcome::default()),
    };
    match result {
        Ok(outcome) if outcome.cleaning_incomplete() => ExitCode::from(EXIT_NOT_CONVERGED),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.category().exit_code() as u8)
        }
    }
}
