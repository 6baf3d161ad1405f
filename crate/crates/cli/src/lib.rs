//! Config ingestion, scenario runs and reproducible table output for the
//! `ringberry` command.

// `!(x > 0.0)` is used on purpose so NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod manifest;
pub mod scenario;
pub mod table;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{parse_config, parse_str, to_config_string, ConfigError, ScenarioConfig, Style};
pub use manifest::{sha256_hex, RunManifest};
pub use scenario::{run_scenario, ScenarioError, Subcommand};
pub use table::{emit_plot_data, Cell, Table, TableError};

/// Output directory when neither `--out` nor the config names one.
pub const DEFAULT_OUT: &str = "ringberry-out";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for anything the user fixes in the inputs, 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Scenario(ScenarioError::Table(TableError::Empty(_))) => 2,
            CliError::Scenario(_) => 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub subcommand: Subcommand,
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    /// Recorded in the manifest; the pool itself is set up by the caller.
    pub threads: usize,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub directory: PathBuf,
    pub manifest: RunManifest,
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parse, run, and write tables, the canonical config and the manifest.
/// Nothing is written unless every table renders.
pub fn execute(opts: &RunOptions) -> Result<RunSummary, CliError> {
    let mut cfg = parse_config(&opts.config)?;
    if let Some(seed) = opts.seed {
        cfg.analysis.seed = seed;
    }
    let dir = opts
        .out
        .clone()
        .or_else(|| cfg.output.directory.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let canonical = to_config_string(&cfg);

    let start = Instant::now();
    let tables = run_scenario(&cfg, opts.subcommand)?;
    let wall = start.elapsed().as_secs_f64();

    let mut files = Vec::new();
    for t in &tables {
        for &style in &cfg.output.formats {
            let ext = match style {
                Style::Csv => "csv",
                Style::GnuplotBlock => "dat",
            };
            let text = emit_plot_data(t, style).map_err(ScenarioError::from)?;
            files.push((format!("{}.{ext}", t.name), text));
        }
    }

    std::fs::create_dir_all(&dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut outputs = Vec::new();
    for (name, text) in &files {
        write(&dir.join(name), text.as_bytes())?;
        outputs.push((name.clone(), sha256_hex(text.as_bytes())));
    }
    write(&dir.join(manifest::CONFIG_COPY), canonical.as_bytes())?;
    let manifest = RunManifest {
        subcommand: opts.subcommand.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        source_config: opts.config.display().to_string(),
        config_sha256: sha256_hex(canonical.as_bytes()),
        seed: cfg.analysis.seed,
        threads: opts.threads,
        wall_time_s: wall,
        outputs,
    };
    write(&dir.join(manifest::MANIFEST_FILE), manifest.render().as_bytes())?;
    log::info!("{} finished in {wall:.2} s, {} file(s) in {}", opts.subcommand.name(), files.len(), dir.display());
    Ok(RunSummary { directory: dir, manifest })
}
