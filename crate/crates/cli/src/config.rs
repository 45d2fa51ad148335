//! Flat `key = value` run configuration.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use ldpcgi_core::{BpMode, BpOptions, DegreeDistribution, EnergyRule, Fading};

use crate::error::{CliError, Result};
use crate::formats::{fading_name, parse_fading};

/// Ordered key/value pairs. Later duplicates win.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    pairs: Vec<(String, String)>,
}

impl KeyValues {
    /// One `key = value` per line; `#` starts a comment.
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut kv = KeyValues::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", lineno + 1))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(format!("line {}: empty key", lineno + 1));
            }
            kv.set(k, v.trim());
        }
        Ok(kv)
    }

    pub fn set(&mut self, key: &str, value: &str) {
        match self.pairs.iter_mut().find(|(k, _)| k == key) {
            Some(pair) => pair.1 = value.to_string(),
            None => self.pairs.push((key.to_string(), value.to_string())),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_parsed<T: FromStr>(&self, key: &str) -> std::result::Result<Option<T>, String> {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|_| format!("bad value for {key}: {v:?}")))
            .transpose()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.pairs.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

/// Number of shots: a multiple of the pixel count, or an absolute value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShotCount {
    Multiplier(f64),
    Total(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineEnsemble {
    Speckle,
    Coded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Builtin scene name, `random`, or a PGM path.
    pub scene: String,
    pub width: usize,
    pub height: usize,
    pub shots: ShotCount,
    pub degree: DegreeDistribution,
    pub snr_db: Vec<f64>,
    /// SNR for experiments that run at a single operating point.
    pub point_snr_db: f64,
    pub fading: Fading,
    pub csi: bool,
    pub decoder: BpOptions,
    pub trials: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub sampling_list: Vec<f64>,
    pub baseline_duty: f64,
    pub baseline_ensemble: BaselineEnsemble,
    pub gray_bits: u32,
    pub energy_rule: EnergyRule,
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scene: "glyphs".into(),
            width: 16,
            height: 16,
            shots: ShotCount::Multiplier(2.0),
            degree: DegreeDistribution::regular(8).expect("valid degree"),
            snr_db: (0..8).map(|i| 2.0 * i as f64).collect(),
            point_snr_db: 10.0,
            fading: Fading::Rayleigh,
            csi: true,
            decoder: BpOptions::default(),
            trials: 10,
            seed: 1,
            out: PathBuf::from("runs"),
            sampling_list: vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
            baseline_duty: 0.15,
            baseline_ensemble: BaselineEnsemble::Speckle,
            gray_bits: 5,
            energy_rule: EnergyRule::PixelPlusParity,
            threads: 0,
        }
    }
}

pub const PRESETS: &[&str] = &["desk", "paper-v"];

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::config(format!("bad number in {key}: {t:?}"))))
        .collect()
}

fn list_string(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse::<T>().map_err(|_| CliError::config(format!("bad value for {key}: {v:?}")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CliError::config(format!("bad boolean for {key}: {v:?}"))),
    }
}

impl RunConfig {
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "desk" => Ok(RunConfig::default()),
            "paper-v" => Ok(RunConfig {
                width: 32,
                height: 32,
                shots: ShotCount::Total(2048),
                degree: DegreeDistribution::regular(128)?,
                trials: 10,
                ..RunConfig::default()
            }),
            _ => Err(CliError::config(format!("unknown preset {name:?}; known: {}", PRESETS.join(", ")))),
        }
    }

    pub fn k_info(&self) -> usize {
        self.width * self.height
    }

    pub fn n_total(&self) -> usize {
        match self.shots {
            ShotCount::Total(n) => n,
            ShotCount::Multiplier(m) => n_for_multiplier(self.k_info(), m),
        }
    }

    pub fn sampling_rate(&self) -> f64 {
        self.n_total() as f64 / self.k_info() as f64
    }

    /// Apply one setting. Keys under `run.` are manifest records and ignored.
    pub fn apply(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "scene" => self.scene = v.to_string(),
            "width" => self.width = parse_value(key, v)?,
            "height" => self.height = parse_value(key, v)?,
            "sampling" => self.shots = ShotCount::Multiplier(parse_value(key, v)?),
            "n_total" => self.shots = ShotCount::Total(parse_value(key, v)?),
            "degree" => self.degree = v.parse()?,
            "snr_db" => self.snr_db = parse_list(key, v)?,
            "point_snr_db" => self.point_snr_db = parse_value(key, v)?,
            "fading" => {
                self.fading = parse_fading(v).ok_or_else(|| CliError::config(format!("bad fading {v:?}")))?
            }
            "csi" => self.csi = parse_bool(key, v)?,
            "decoder.mode" => {
                self.decoder.mode = match v {
                    "sum" => BpMode::SumConstraint,
                    "gf2" => BpMode::Gf2,
                    _ => return Err(CliError::config(format!("bad decoder.mode {v:?}"))),
                }
            }
            "decoder.max_iters" => self.decoder.max_iters = parse_value(key, v)?,
            "decoder.stall_window" => self.decoder.stall_window = parse_value(key, v)?,
            "decoder.prior" => self.decoder.pixel_prior_one = parse_value(key, v)?,
            "decoder.damping" => self.decoder.damping = parse_value(key, v)?,
            "trials" => self.trials = parse_value(key, v)?,
            "seed" => self.seed = parse_value(key, v)?,
            "out" => self.out = PathBuf::from(v),
            "sampling_list" => self.sampling_list = parse_list(key, v)?,
            "baseline_duty" => self.baseline_duty = parse_value(key, v)?,
            "baseline_ensemble" => {
                self.baseline_ensemble = match v {
                    "speckle" => BaselineEnsemble::Speckle,
                    "coded" => BaselineEnsemble::Coded,
                    _ => return Err(CliError::config(format!("bad baseline_ensemble {v:?}"))),
                }
            }
            "gray_bits" => self.gray_bits = parse_value(key, v)?,
            "energy_rule" => {
                self.energy_rule = match v {
                    "pixel+parity" => EnergyRule::PixelPlusParity,
                    "parity" => EnergyRule::ParityOnly,
                    _ => return Err(CliError::config(format!("bad energy_rule {v:?}"))),
                }
            }
            "threads" => self.threads = parse_value(key, v)?,
            k if k.starts_with("run.") => {}
            _ => return Err(CliError::config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// A preset (from a `preset` key, else `desk`) overlaid with every key.
    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        let mut cfg = RunConfig::preset(kv.get("preset").unwrap_or("desk"))?;
        for (k, v) in kv.iter().filter(|(k, _)| *k != "preset") {
            cfg.apply(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_key_values(&KeyValues::parse(text).map_err(CliError::Config)?)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(CliError::config(m));
        if self.width == 0 || self.height == 0 {
            return fail("width and height must be positive");
        }
        if let ShotCount::Multiplier(m) = self.shots {
            if !(m > 0.0 && m.is_finite()) {
                return fail("sampling must be positive");
            }
        }
        if self.n_total() < self.k_info() {
            return fail("the shot count must be at least the pixel count");
        }
        if self.trials == 0 {
            return fail("trials must be at least 1");
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|x| !x.is_finite()) {
            return fail("snr_db must be a non-empty list of finite values");
        }
        if !self.point_snr_db.is_finite() {
            return fail("point_snr_db must be finite");
        }
        if self.sampling_list.iter().any(|&m| !(m >= 1.0 && m.is_finite())) {
            return fail("sampling_list entries must be at least 1");
        }
        if !(self.baseline_duty > 0.0 && self.baseline_duty <= 1.0) {
            return fail("baseline_duty must lie in (0, 1]");
        }
        if !(1..=16).contains(&self.gray_bits) {
            return fail("gray_bits must lie in 1..=16");
        }
        self.degree.check_against(self.k_info())?;
        self.decoder.validate()?;
        Ok(())
    }

    /// Canonical text form; parsing it yields an equal config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("scene", self.scene.clone());
        put("width", self.width.to_string());
        put("height", self.height.to_string());
        match self.shots {
            ShotCount::Multiplier(m) => put("sampling", m.to_string()),
            ShotCount::Total(n) => put("n_total", n.to_string()),
        }
        put("degree", self.degree.to_string());
        put("snr_db", list_string(&self.snr_db));
        put("point_snr_db", self.point_snr_db.to_string());
        put("fading", fading_name(self.fading).into());
        put("csi", self.csi.to_string());
        put(
            "decoder.mode",
            match self.decoder.mode {
                BpMode::SumConstraint => "sum",
                BpMode::Gf2 => "gf2",
            }
            .into(),
        );
        put("decoder.max_iters", self.decoder.max_iters.to_string());
        put("decoder.stall_window", self.decoder.stall_window.to_string());
        put("decoder.prior", self.decoder.pixel_prior_one.to_string());
        put("decoder.damping", self.decoder.damping.to_string());
        put("trials", self.trials.to_string());
        put("seed", self.seed.to_string());
        put("out", self.out.display().to_string());
        put("sampling_list", list_string(&self.sampling_list));
        put("baseline_duty", self.baseline_duty.to_string());
        put(
            "baseline_ensemble",
            match self.baseline_ensemble {
                BaselineEnsemble::Speckle => "speckle",
                BaselineEnsemble::Coded => "coded",
            }
            .into(),
        );
        put("gray_bits", self.gray_bits.to_string());
        put(
            "energy_rule",
            match self.energy_rule {
                EnergyRule::PixelPlusParity => "pixel+parity",
                EnergyRule::ParityOnly => "parity",
            }
            .into(),
        );
        put("threads", self.threads.to_string());
        s
    }
}

pub fn n_for_multiplier(k: usize, m: f64) -> usize {
    (k as f64 * m).round() as usize
}
