//! Effective run configuration: flags > environment > config file >
//! defaults, with provenance tracked for `--verbose`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

pub const ENV_LEXICON: &str = "EMOFLOW_LEXICON";
pub const ENV_ENDPOINT: &str = "EMOFLOW_ENDPOINT";

/// Optional keys of the TOML config file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub lexicon: Option<PathBuf>,
    pub endpoint: Option<String>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub labels: Option<Vec<String>>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        if !path.exists() {
            return Err(CliError::usage(format!("config file not found: {}", path.display())));
        }
        let raw = std::fs::read_to_string(path)
            .map_err(|e| CliError::runtime(format!("reading {}: {e}", path.display())))?;
        toml::from_str(&raw).map_err(|e| CliError::usage(format!("config file {}: {e}", path.display())))
    }
}

/// One resolved setting plus where it came from.
#[derive(Debug, Clone)]
pub struct Resolved<T> {
    pub value: T,
    pub source: &'static str,
}

pub fn resolve<T>(
    flag: Option<T>,
    env: Option<T>,
    file: Option<T>,
    default: T,
) -> Resolved<T> {
    if let Some(value) = flag {
        Resolved { value, source: "flag" }
    } else if let Some(value) = env {
        Resolved { value, source: "env" }
    } else if let Some(value) = file {
        Resolved { value, source: "config" }
    } else {
        Resolved { value: default, source: "default" }
    }
}

/// Shared settings every subcommand resolves before doing work.
#[derive(Debug)]
pub struct Settings {
    pub seed: Resolved<u64>,
    pub jobs: Resolved<usize>,
    pub lexicon: Option<Resolved<PathBuf>>,
    pub endpoint: Option<Resolved<String>>,
    pub labels: Resolved<Vec<String>>,
    pub verbose: bool,
    pub strict: bool,
}

pub const DEFAULT_LABELS: [&str; 6] = ["anger", "fear", "joy", "love", "sadness", "surprise"];

impl Settings {
    pub fn describe(&self) -> String {
        let mut out = String::from("effective configuration:\n");
        let _ = writeln!(out, "  seed = {} ({})", self.seed.value, self.seed.source);
        let _ = writeln!(
            out,
            "  jobs = {} ({})",
            if self.jobs.value == 0 { "auto".to_string() } else { self.jobs.value.to_string() },
            self.jobs.source
        );
        match &self.lexicon {
            Some(l) => {
                let _ = writeln!(out, "  lexicon = {} ({})", l.value.display(), l.source);
            }
            None => {
                let _ = writeln!(out, "  lexicon = <none>");
            }
        }
        match &self.endpoint {
            Some(e) => {
                let _ = writeln!(out, "  endpoint = {} ({})", e.value, e.source);
            }
            None => {
                let _ = writeln!(out, "  endpoint = <none>");
            }
        }
        let _ = writeln!(out, "  labels = {} ({})", self.labels.value.join(","), self.labels.source);
        let _ = writeln!(out, "  strict = {}", self.strict);
        out
    }
}
