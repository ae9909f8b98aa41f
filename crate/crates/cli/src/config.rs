//! Run configuration: defaults, environment variables, config file, flags.
//!
//! Precedence, lowest to highest: built-in default, `TS_MESH` / `TS_TOL`
//! environment variables, `--config` file entries, explicit flags. The
//! config file is a flat JSON object; unknown keys are rejected so a typo
//! cannot silently fall back to a default.

use std::path::PathBuf;

use crate::Failure;

/// Output format of structured results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Resolved settings shared by the subcommands. Every run is deterministic:
/// identical settings produce byte-identical output.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Grid cells per ball.
    pub mesh: usize,
    /// Tolerance override; each subcommand applies its own default when
    /// absent (documented on the subcommand).
    pub tol: Option<f64>,
    /// Total volume parameter of the ball pair.
    pub c: f64,
    /// Requested format; scalar subcommands print a bare number when absent.
    pub format: Option<Format>,
    /// Output path; stdout when absent.
    pub output: Option<PathBuf>,
}

/// The shared flags as clap sees them, before resolution.
#[derive(Debug, clap::Args)]
pub struct CommonFlags {
    /// Flat JSON config file (keys: mesh, tol, c, format, output).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Grid cells per ball [default: 400, env: TS_MESH].
    #[arg(long, global = true)]
    pub mesh: Option<usize>,
    /// Tolerance; meaning depends on the subcommand [env: TS_TOL].
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Total volume parameter of the ball pair [default: 2].
    #[arg(long, global = true)]
    pub c: Option<f64>,
    /// Output format for structured results [default: csv].
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

fn env_parsed<T: std::str::FromStr>(name: &str) -> Result<Option<T>, Failure> {
    match std::env::var(name) {
        Ok(raw) => raw.parse::<T>().map(Some).map_err(|_| {
            Failure::Usage(format!("environment variable {name} is not a valid number: {raw:?}"))
        }),
        Err(_) => Ok(None),
    }
}

impl RunConfig {
    /// Apply the precedence chain and validate the result.
    pub fn resolve(flags: &CommonFlags) -> Result<Self, Failure> {
        let mut cfg = RunConfig {
            mesh: 400,
            tol: None,
            c: 2.0,
            format: None,
            output: None,
        };
        if let Some(mesh) = env_parsed::<usize>("TS_MESH")? {
            cfg.mesh = mesh;
        }
        if let Some(tol) = env_parsed::<f64>("TS_TOL")? {
            cfg.tol = Some(tol);
        }
        if let Some(path) = &flags.config {
            cfg.apply_file(path)?;
        }
        if let Some(mesh) = flags.mesh {
            cfg.mesh = mesh;
        }
        if let Some(tol) = flags.tol {
            cfg.tol = Some(tol);
        }
        if let Some(c) = flags.c {
            cfg.c = c;
        }
        if let Some(format) = flags.format {
            cfg.format = Some(format);
        }
        if let Some(output) = &flags.output {
            cfg.output = Some(output.clone());
        }
        if cfg.mesh < 4 {
            return Err(Failure::Usage(format!("mesh must be at least 4, got {}", cfg.mesh)));
        }
        if let Some(tol) = cfg.tol {
            if !(tol > 0.0) || !tol.is_finite() {
                return Err(Failure::Usage(format!("tolerance must be positive, got {tol}")));
            }
        }
        if !(cfg.c > 0.0) || !cfg.c.is_finite() {
            return Err(Failure::Usage(format!("volume parameter must be positive, got {}", cfg.c)));
        }
        Ok(cfg)
    }

    fn apply_file(&mut self, path: &PathBuf) -> Result<(), Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let parsed: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Failure::Usage(format!("config {} is not valid JSON: {e}", path.display())))?;
        let object = parsed.as_object().ok_or_else(|| {
            Failure::Usage(format!("config {} must be a flat JSON object", path.display()))
        })?;
        for (key, value) in object {
            match key.as_str() {
                "mesh" => {
                    self.mesh = value
                        .as_u64()
                        .and_then(|v| usize::try_from(v).ok())
                        .ok_or_else(|| bad_value(key, value))?;
                }
                "tol" => self.tol = Some(value.as_f64().ok_or_else(|| bad_value(key, value))?),
                "c" => self.c = value.as_f64().ok_or_else(|| bad_value(key, value))?,
                "format" => {
                    self.format = Some(match value.as_str() {
                        Some("csv") => Format::Csv,
                        Some("json") => Format::Json,
                        _ => return Err(bad_value(key, value)),
                    });
                }
                "output" => {
                    let path = value.as_str().ok_or_else(|| bad_value(key, value))?;
                    self.output = Some(PathBuf::from(path));
                }
                _ => {
                    return Err(Failure::Usage(format!(
                        "unknown config key {key:?} (expected mesh, tol, c, format, output)"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn bad_value(key: &str, value: &serde_json::Value) -> Failure {
    Failure::Usage(format!("config key {key:?} has an unusable value: {value}"))
}
