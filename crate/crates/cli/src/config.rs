//! Experiment configuration: a TOML document, overridden by flags.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MachineKind {
    /// Realtime tape machine for ULOG.
    Ulog,
    /// Realtime four-counter automaton for UP4CA.
    P4ca,
    /// One-way LOGLOG machine.
    Loglog,
    /// Equal-time one-way LOGLOG machine.
    LoglogEqualTime,
    /// Realtime machine reading '3'-padded LOGLOG words.
    LoglogPadded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    #[default]
    Scaled,
    Paper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct MachineConfig {
    pub name: MachineKind,
    /// Set text, e.g. `finite:1,3` or `preset:all`.
    pub set: String,
    pub geometry: Geometry,
    /// Prime length factor; the geometry default when absent.
    pub c: Option<u32>,
    /// Shortest block compared with a prime; the geometry default when absent.
    pub min_random_check_m: Option<u64>,
}

impl Default for MachineConfig {
    fn default() -> Self {
        MachineConfig {
            name: MachineKind::Ulog,
            set: "preset:all".into(),
            geometry: Geometry::Scaled,
            c: None,
            min_random_check_m: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub machine: MachineConfig,
    /// Unary length as a decimal integer.
    pub n: Option<String>,
    /// Index `i` (unary) or `k` (LOGLOG) of a generated member.
    pub member: Option<u32>,
    /// LOGLOG chain ending at `bin(s)`.
    pub s: Option<u64>,
    pub word: Option<String>,
    pub file: Option<PathBuf>,
    pub trials: u64,
    pub master_seed: u64,
    pub workers: usize,
    pub level: f64,
    pub max_steps: u64,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            machine: MachineConfig::default(),
            n: None,
            member: None,
            s: None,
            word: None,
            file: None,
            trials: 1000,
            master_seed: 0,
            workers: 1,
            level: rtpm::analysis::DEFAULT_LEVEL,
            max_steps: 1 << 40,
            output: None,
            format: Format::Json,
        }
    }
}

/// Flags shared by `build`, `run` and `estimate`. Each one overrides the
/// same field of `--config`.
#[derive(Args, Clone, Debug, Default)]
pub struct ExperimentArgs {
    /// TOML file with the same fields as the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub machine: Option<MachineKind>,
    #[arg(long)]
    pub set: Option<String>,
    #[arg(long, value_enum)]
    pub geometry: Option<Geometry>,
    #[arg(long)]
    pub c: Option<u32>,
    #[arg(long)]
    pub min_random_check_m: Option<u64>,
    /// Unary input length (decimal, any size).
    #[arg(long)]
    pub n: Option<String>,
    /// Generated member: index i for unary machines, k for LOGLOG.
    #[arg(long)]
    pub member: Option<u32>,
    /// LOGLOG chain ending at bin(s).
    #[arg(long)]
    pub s: Option<u64>,
    /// Literal input word.
    #[arg(long)]
    pub word: Option<String>,
    /// Input word read from a file.
    #[arg(long)]
    pub file: Option<PathBuf>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub level: Option<f64>,
    #[arg(long)]
    pub max_steps: Option<u64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn resolve(args: &ExperimentArgs) -> Result<Self, CliError> {
        let mut cfg = match &args.config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        let a = args.clone();
        if let Some(v) = a.machine {
            cfg.machine.name = v;
        }
        if let Some(v) = a.set {
            cfg.machine.set = v;
        }
        if let Some(v) = a.geometry {
            cfg.machine.geometry = v;
        }
        if a.c.is_some() {
            cfg.machine.c = a.c;
        }
        if a.min_random_check_m.is_some() {
            cfg.machine.min_random_check_m = a.min_random_check_m;
        }
        // An input flag replaces whatever input the file named.
        if a.n.is_some() || a.member.is_some() || a.s.is_some() || a.word.is_some() || a.file.is_some() {
            cfg.n = a.n;
            cfg.member = a.member;
            cfg.s = a.s;
            cfg.word = a.word;
            cfg.file = a.file;
        }
        if let Some(v) = a.trials {
            cfg.trials = v;
        }
        if let Some(v) = a.seed {
            cfg.master_seed = v;
        }
        if let Some(v) = a.workers {
            cfg.workers = v;
        }
        if let Some(v) = a.level {
            cfg.level = v;
        }
        if let Some(v) = a.max_steps {
            cfg.max_steps = v;
        }
        if a.output.is_some() {
            cfg.output = a.output;
        }
        if let Some(v) = a.format {
            cfg.format = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let inputs = [self.n.is_some(), self.member.is_some(), self.s.is_some(), self.word.is_some(), self.file.is_some()];
        if inputs.iter().filter(|&&b| b).count() > 1 {
            return Err(CliError::Usage("give at most one of n, member, s, word, file".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(CliError::Usage(format!("level {} outside (0, 1)", self.level)));
        }
        if self.trials == 0 {
            return Err(CliError::Usage("trials must be positive".into()));
        }
        Ok(())
    }
}
