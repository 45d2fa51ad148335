//! Experiment harness for LDPC-coded computational ghost imaging: run
//! configuration, seeding, builtin scenes, sweep drivers and file formats.

pub mod config;
pub mod error;
pub mod experiments;
pub mod formats;
pub mod manifest;
pub mod pgm;
pub mod scenes;
pub mod seed;

pub use config::{KeyValues, RunConfig};
pub use error::{CliError, Result};
pub use experiments::{
    run, run_baseline_compare, run_ber_sweep, run_bound_sweep, run_grayscale, run_sampling_sweep, Experiment,
    RunOutput,
};
pub use manifest::RunManifest;
pub use seed::derive_trial_seed;

/// Build a config from an optional preset, an optional config file text and
/// `key=value` overrides, applied in that order.
pub fn assemble_config(preset: Option<&str>, file_text: Option<&str>, overrides: &[(String, String)]) -> Result<RunConfig> {
    let mut kv = match file_text {
        Some(text) => KeyValues::parse(text).map_err(CliError::Config)?,
        None => KeyValues::default(),
    };
    if let Some(p) = preset {
        kv.set("preset", p);
    }
    for (k, v) in overrides {
        kv.set(k, v);
    }
    RunConfig::from_key_values(&kv)
}

/// Re-run the experiment recorded in a manifest, optionally into another directory.
pub fn replay(manifest: &RunManifest, out: Option<&std::path::Path>) -> Result<RunOutput> {
    let exp = Experiment::from_name(&manifest.experiment)
        .ok_or_else(|| CliError::config(format!("unknown experiment {:?}", manifest.experiment)))?;
    let mut cfg = manifest.config.clone();
    if let Some(dir) = out {
        cfg.out = dir.to_path_buf();
    }
    run(exp, &cfg)
}
