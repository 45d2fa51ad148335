//! Plain-text file formats: generator matrices, measurements, diagnostics
//! and tables.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ldpcgi_core::{ChannelParams, Diagnostics, Fading, GeneratorMatrix, Measurement};

use crate::config::KeyValues;
use crate::error::{CliError, Result};

/// Header `K N num_parity_cols seed`, then one line of sorted indices per
/// parity column.
pub fn generator_to_string(g: &GeneratorMatrix) -> String {
    let mut out = format!("{} {} {} {}\n", g.k_info(), g.n_total(), g.num_parity(), g.seed());
    for col in g.parity_columns() {
        let line: Vec<String> = col.iter().map(usize::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn generator_from_str(text: &str) -> std::result::Result<GeneratorMatrix, String> {
    let mut lines = text.lines();
    let header: Vec<u64> = lines
        .next()
        .ok_or("empty file")?
        .split_whitespace()
        .map(|t| t.parse::<u64>().map_err(|_| format!("bad header token {t:?}")))
        .collect::<std::result::Result<_, _>>()?;
    let [k, n, cols, seed] = header[..] else {
        return Err("header must be `K N num_parity_cols seed`".into());
    };
    let columns: Vec<Vec<usize>> = lines
        .map(|l| {
            l.split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|_| format!("bad index {t:?}")))
                .collect()
        })
        .collect::<std::result::Result<_, _>>()?;
    if columns.len() as u64 != cols {
        return Err(format!("header announces {cols} parity columns, found {}", columns.len()));
    }
    GeneratorMatrix::from_parts(k as usize, n as usize, seed, columns).map_err(|e| e.to_string())
}

pub fn write_generator(path: &Path, g: &GeneratorMatrix) -> Result<()> {
    write_text(path, &generator_to_string(g))
}

pub fn read_generator(path: &Path) -> Result<GeneratorMatrix> {
    let text = read_text(path)?;
    generator_from_str(&text).map_err(|r| CliError::format(path, r))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// A CSV table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let idx = self.header.iter().position(|h| *h == name)?;
        Some(self.rows.iter().map(|r| r[idx].as_str()).collect())
    }
}

/// Shortest round-trip representation; infinities print as `inf`.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn measurement_csv(m: &Measurement) -> String {
    let mut out = String::from("index,bucket,fading_mag\n");
    for (i, (r, h)) in m.bucket.iter().zip(&m.fading_mag).enumerate() {
        let _ = writeln!(out, "{i},{r},{h}");
    }
    out
}

pub fn fading_name(f: Fading) -> &'static str {
    match f {
        Fading::None => "none",
        Fading::Rayleigh => "rayleigh",
    }
}

pub fn parse_fading(s: &str) -> Option<Fading> {
    match s {
        "none" => Some(Fading::None),
        "rayleigh" => Some(Fading::Rayleigh),
        _ => None,
    }
}

/// Sidecar for a measurement CSV: channel parameters and seed.
pub fn measurement_meta(m: &Measurement) -> String {
    format!(
        "es = {}\nn0 = {}\nfading = {}\ncsi = {}\nseed = {}\n",
        m.channel.es,
        m.channel.n0,
        fading_name(m.channel.fading),
        m.channel.csi_known,
        m.seed
    )
}

pub fn meta_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta")
}

pub fn write_measurement(path: &Path, m: &Measurement) -> Result<()> {
    write_text(path, &measurement_csv(m))?;
    write_text(&meta_path(path), &measurement_meta(m))
}

pub fn read_measurement(path: &Path) -> Result<Measurement> {
    let meta_file = meta_path(path);
    let kv = KeyValues::parse(&read_text(&meta_file)?).map_err(|r| CliError::format(&meta_file, r))?;
    let bad = |r: String| CliError::format(&meta_file, r);
    let channel = ChannelParams {
        es: kv.get_parsed("es").map_err(bad)?.ok_or_else(|| CliError::format(&meta_file, "missing es"))?,
        n0: kv.get_parsed("n0").map_err(bad)?.ok_or_else(|| CliError::format(&meta_file, "missing n0"))?,
        fading: match kv.get("fading") {
            Some(f) => parse_fading(f).ok_or_else(|| CliError::format(&meta_file, "bad fading"))?,
            None => Fading::None,
        },
        csi_known: kv.get_parsed("csi").map_err(bad)?.unwrap_or(true),
    };
    let seed = kv.get_parsed("seed").map_err(bad)?.unwrap_or(0);

    let text = read_text(path)?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("index,bucket,fading_mag") {
        return Err(CliError::format(path, "expected header index,bucket,fading_mag"));
    }
    let mut bucket = Vec::new();
    let mut fading = Vec::new();
    for (row, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = match fields[..] {
            [i, r, h] => i
                .parse::<usize>()
                .ok()
                .filter(|&i| i == row)
                .and_then(|_| Some((r.parse::<f64>().ok()?, h.parse::<f64>().ok()?))),
            _ => None,
        };
        let (r, h) = parsed.ok_or_else(|| CliError::format(path, format!("bad row {}", row + 1)))?;
        bucket.push(r);
        fading.push(h);
    }
    Ok(Measurement::new(bucket, fading, channel, seed)?)
}

pub const DIAGNOSTICS_HEADER: &[&str] = &["iterations_run", "converged", "residual", "unpinned_pixel_count"];

pub fn diagnostics_row(d: &Diagnostics) -> Vec<String> {
    vec![
        d.iterations_run.to_string(),
        d.converged.to_string(),
        num(d.residual),
        d.unpinned_pixel_count.to_string(),
    ]
}

/// Unnormalized reconstruction values, one row per pixel.
pub fn values_csv(values: &[f64]) -> String {
    let mut out = String::from("index,value\n");
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(out, "{i},{v}");
    }
    out
}
