//! Run manifests: the full config echo plus `run.*` records.
//!
//! A manifest parses as a config file (`run.*` keys are ignored by the
//! config loader), so `--config manifest.txt` or `replay manifest.txt`
//! reproduces the run.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use ldpcgi_core::rng::RNG_ALGORITHM;

use crate::config::{KeyValues, RunConfig};
use crate::error::{CliError, Result};
use crate::formats::{read_text, write_text};

pub const FILE_NAME: &str = "manifest.txt";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Fixed metric and reconstruction conventions, echoed for readers of a run.
const CONVENTIONS: &[(&str, &str)] = &[
    ("run.psnr", "unit peak after min-max normalization of both images"),
    ("run.normalize_constant", "zeros"),
    ("run.binarization", "otsu two-class threshold on raw baseline values"),
    ("run.cgi", "ensemble correlation (1/N) sum (R - mean R)(A - mean A)"),
    ("run.dgi", "differential correlation with R - (mean R / mean S) S"),
    ("run.pinv", "minimum-norm least squares, singular values below 1e-10 sigma_max dropped"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub config: RunConfig,
    pub experiment: String,
    pub tool_version: String,
    pub rng: String,
    /// Seconds since the Unix epoch.
    pub started: u64,
    /// `(point, trial, seed)` for every trial in the run.
    pub seeds: Vec<(usize, usize, u64)>,
}

impl RunManifest {
    pub fn new(config: &RunConfig, experiment: &str, seeds: Vec<(usize, usize, u64)>) -> Self {
        let started = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        RunManifest {
            config: config.clone(),
            experiment: experiment.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            rng: RNG_ALGORITHM.to_string(),
            started,
            seeds,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# ldpcgi run manifest\n");
        s.push_str(&self.config.to_text());
        let _ = writeln!(s, "run.experiment = {}", self.experiment);
        let _ = writeln!(s, "run.tool_version = {}", self.tool_version);
        let _ = writeln!(s, "run.rng = {}", self.rng);
        let _ = writeln!(s, "run.started = {}", self.started);
        for (k, v) in CONVENTIONS {
            let _ = writeln!(s, "{k} = {v}");
        }
        for (p, t, seed) in &self.seeds {
            let _ = writeln!(s, "run.seed.p{p}.t{t} = {seed}");
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let kv = KeyValues::parse(text).map_err(CliError::Config)?;
        let config = RunConfig::from_key_values(&kv)?;
        let field = |k: &str| {
            kv.get(k)
                .map(str::to_string)
                .ok_or_else(|| CliError::config(format!("manifest lacks {k}")))
        };
        let mut seeds = Vec::new();
        for (k, v) in kv.iter() {
            if let Some(rest) = k.strip_prefix("run.seed.p") {
                let parsed = rest.split_once(".t").and_then(|(p, t)| {
                    Some((p.parse().ok()?, t.parse().ok()?, v.parse().ok()?))
                });
                seeds.push(parsed.ok_or_else(|| CliError::config(format!("bad seed record {k}")))?);
            }
        }
        Ok(RunManifest {
            config,
            experiment: field("run.experiment")?,
            tool_version: field("run.tool_version")?,
            rng: field("run.rng")?,
            started: field("run.started")?
                .parse()
                .map_err(|_| CliError::config("bad run.started"))?,
            seeds,
        })
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_text(&dir.join(FILE_NAME), &self.to_text())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?)
    }
}
