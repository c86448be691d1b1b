//! Command-line front end: configuration, file export and the `junction`,
//! `design`, `sweep`, `bound` and `verify` commands.

pub mod commands;
pub mod config;
pub mod svg;
pub mod table;
pub mod touchstone;
pub mod verify;

use std::path::{Path, PathBuf};

use stmcirc_core::Error as CoreError;

pub use config::{load_config, parse_config, ConfigError, DesignConfig};

/// Reference junction and 3 dB / 20 dB specs, used when no config is given.
pub const DEFAULT_CONFIG: &str = include_str!("../../../configs/reference.cfg");

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Numeric {
        context: &'static str,
        #[source]
        source: CoreError,
    },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0} verification check(s) failed")]
    Verification(usize),
    #[error("no feasible cell in the sweep")]
    EmptySweep,
}

impl CliError {
    pub fn numeric(context: &'static str) -> impl FnOnce(CoreError) -> CliError {
        move |source| CliError::Numeric { context, source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numeric { source, .. } => match source {
                CoreError::InfeasibleSpecs(_) | CoreError::EmptyFeasibleSet | CoreError::NoBand { .. } => {
                    EXIT_INFEASIBLE
                }
                _ => EXIT_NUMERIC,
            },
            CliError::EmptySweep => EXIT_INFEASIBLE,
            CliError::Io { .. } | CliError::Verification(_) => EXIT_NUMERIC,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    S3p,
    Svg,
    All,
}

/// Output directory plus the formats to write.
#[derive(Debug, Clone)]
pub struct Outputs {
    pub dir: PathBuf,
    pub format: Format,
    written: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(dir: impl Into<PathBuf>, format: Format) -> Self {
        Self {
            dir: dir.into(),
            format,
            written: Vec::new(),
        }
    }

    pub fn wants(&self, f: Format) -> bool {
        self.format == Format::All || self.format == f
    }

    /// Writes `name` when its format is selected. Plain-text reports are
    /// always written.
    pub fn write(&mut self, kind: Option<Format>, name: &str, contents: &str) -> Result<(), CliError> {
        if let Some(k) = kind {
            if !self.wants(k) {
                return Ok(());
            }
        }
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| CliError::Io { path, source }
        };
        std::fs::create_dir_all(&self.dir).map_err(io(&self.dir))?;
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(io(&path))?;
        log::info!("wrote {}", path.display());
        self.written.push(path);
        Ok(())
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}
