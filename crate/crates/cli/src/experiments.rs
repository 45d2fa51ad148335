//! Sweep drivers. Trials run on a rayon pool; rows are assembled in
//! `(point, trial)` order so output files do not depend on scheduling.

use std::fs;
use std::path::{Path, PathBuf};

use ldpcgi_core::baselines::binarize;
use ldpcgi_core::bp::{decode_sum_bp, symbol_llr};
use ldpcgi_core::metrics::{self, grayscale_stack, normalize_image, required_frames};
use ldpcgi_core::rng::seeded;
use ldpcgi_core::{
    bound_terms, build_generator, cgi_reconstruct, decode_gf2_bp, derive_parity_check, dgi_reconstruct,
    patterns_from_generator, pinv_reconstruct, random_speckle, sense, transmit_codeword, BoundParams, BoundTerms,
    BpMode, ChannelParams, CodeSpec, Diagnostics, FrameStack, GeneratorMatrix, GrayImage, Method, SceneImage,
};
use rand::Rng;
use rayon::prelude::*;

use crate::config::{n_for_multiplier, BaselineEnsemble, RunConfig};
use crate::error::{CliError, Result};
use crate::formats::{diagnostics_row, num, values_csv, write_text, Table, DIAGNOSTICS_HEADER};
use crate::manifest::RunManifest;
use crate::pgm;
use crate::scenes;
use crate::seed::{derive_trial_seed, substream, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    BerSweep,
    SamplingSweep,
    Compare,
    Grayscale,
    Bound,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::BerSweep,
        Experiment::SamplingSweep,
        Experiment::Compare,
        Experiment::Grayscale,
        Experiment::Bound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::BerSweep => "ber_sweep",
            Experiment::SamplingSweep => "sampling_sweep",
            Experiment::Compare => "compare",
            Experiment::Grayscale => "grayscale",
            Experiment::Bound => "bound",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }
}

/// What a run wrote, plus the main table.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub table: Table,
    pub manifest: RunManifest,
}

pub const RESULTS_FILE: &str = "results.csv";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";

/// Artifact name `<method>_snr<dB>_s<multiplier>_t<trial>.pgm`.
pub fn image_name(method: &str, snr_db: f64, multiplier: f64, trial: usize) -> String {
    format!("{method}_snr{snr_db}_s{multiplier}_t{trial}.pgm")
}

pub fn run(exp: Experiment, cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    let dir = cfg.out.join(exp.name());
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let (table, seeds) = pool.install(|| match exp {
        Experiment::BerSweep => ber_sweep(cfg, &dir),
        Experiment::SamplingSweep => sampling_sweep(cfg, &dir),
        Experiment::Compare => baseline_compare(cfg, &dir),
        Experiment::Grayscale => grayscale(cfg, &dir),
        Experiment::Bound => bound_sweep(cfg).map(|t| (t, Vec::new())),
    })?;
    write_text(&dir.join(RESULTS_FILE), &table.to_csv())?;
    let manifest = RunManifest::new(cfg, exp.name(), seeds);
    manifest.write(&dir)?;
    Ok(RunOutput { dir, table, manifest })
}

pub fn run_ber_sweep(cfg: &RunConfig) -> Result<RunOutput> {
    run(Experiment::BerSweep, cfg)
}

pub fn run_sampling_sweep(cfg: &RunConfig) -> Result<RunOutput> {
    run(Experiment::SamplingSweep, cfg)
}

pub fn run_baseline_compare(cfg: &RunConfig) -> Result<RunOutput> {
    run(Experiment::Compare, cfg)
}

pub fn run_grayscale(cfg: &RunConfig) -> Result<RunOutput> {
    run(Experiment::Grayscale, cfg)
}

pub fn run_bound_sweep(cfg: &RunConfig) -> Result<RunOutput> {
    run(Experiment::Bound, cfg)
}

pub fn channel(cfg: &RunConfig, snr_db: f64) -> ChannelParams {
    ChannelParams::from_snr_db(snr_db, cfg.fading).with_csi(cfg.csi)
}

pub fn bound_params(cfg: &RunConfig, n_total: usize, snr_db: f64) -> Result<BoundParams> {
    let mut p = BoundParams::from_snr_db(cfg.k_info(), n_total, cfg.degree.clone(), snr_db)?;
    p.energy_rule = cfg.energy_rule;
    Ok(p)
}

/// One coded acquisition and decode.
#[derive(Debug, Clone)]
pub struct CodedTrial {
    pub generator: GeneratorMatrix,
    pub pixels: Vec<u8>,
    pub diagnostics: Diagnostics,
}

/// Draw a code, sense `scene` and decode with the configured decoder.
pub fn coded_trial(cfg: &RunConfig, scene: &SceneImage, n_total: usize, snr_db: f64, seed: u64) -> Result<CodedTrial> {
    let spec = CodeSpec::new(scene.len(), n_total, cfg.degree.clone(), substream(seed, Stream::Code));
    let generator = build_generator(&spec)?;
    let ch = channel(cfg, snr_db);
    let noise_seed = substream(seed, Stream::Noise);
    let result = match cfg.decoder.mode {
        BpMode::SumConstraint => {
            let ens = patterns_from_generator(&generator);
            let m = sense(&ens, scene, &ch, noise_seed)?;
            decode_sum_bp(&m, &ens, &cfg.decoder)?
        }
        BpMode::Gf2 => {
            let bits = scene
                .to_bits()
                .ok_or_else(|| CliError::config("gf2 decoding needs a binary scene"))?;
            let word = generator.encode(&bits)?;
            let m = transmit_codeword(&word, &ch, noise_seed)?;
            let llrs = m
                .bucket
                .iter()
                .zip(m.receiver_gains())
                .map(|(&r, g)| symbol_llr(r, g, &ch))
                .collect::<ldpcgi_core::Result<Vec<f64>>>()?;
            decode_gf2_bp(&llrs, &derive_parity_check(&generator), &cfg.decoder)?
        }
    };
    Ok(CodedTrial { generator, pixels: result.pixels, diagnostics: result.diagnostics })
}

fn scene_for_trial(cfg: &RunConfig, fixed: &Option<SceneImage>, seed: u64) -> Result<SceneImage> {
    match fixed {
        Some(s) => Ok(s.clone()),
        None => scenes::random_scene(cfg.width, cfg.height, substream(seed, Stream::Scene)),
    }
}

fn fixed_scene(cfg: &RunConfig) -> Result<Option<SceneImage>> {
    if scenes::is_per_trial(&cfg.scene) {
        Ok(None)
    } else {
        scenes::resolve(&cfg.scene, cfg.width, cfg.height, cfg.seed).map(Some)
    }
}

fn binary_bits(scene: &SceneImage) -> Result<Vec<u8>> {
    scene
        .to_bits()
        .ok_or_else(|| CliError::config("this experiment needs a binary scene"))
}

/// `(point, trial, seed)` for every cell of a sweep.
pub type Cells = Vec<(usize, usize, u64)>;

/// Seeds for every `(point, trial)` cell, point-major.
fn grid(cfg: &RunConfig, points: usize, trials: usize) -> Cells {
    (0..points)
        .flat_map(|p| (0..trials).map(move |t| (p, t, derive_trial_seed(cfg.seed, t as u32, p as u32))))
        .collect()
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn diagnostics_table(cells: &[(usize, usize, u64)], diags: &[Diagnostics]) -> Table {
    let mut header = vec!["point", "trial"];
    header.extend_from_slice(DIAGNOSTICS_HEADER);
    let mut t = Table::new(&header);
    for ((p, tr, _), d) in cells.iter().zip(diags) {
        let mut row = vec![p.to_string(), tr.to_string()];
        row.extend(diagnostics_row(d));
        t.push(row);
    }
    t
}

type Outcome = (Table, Cells);

fn ber_sweep(cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    let fixed = fixed_scene(cfg)?;
    let n = cfg.n_total();
    let cells = grid(cfg, cfg.snr_db.len(), cfg.trials);
    let results: Vec<(f64, Diagnostics)> = cells
        .par_iter()
        .map(|&(p, _, seed)| {
            let scene = scene_for_trial(cfg, &fixed, seed)?;
            let truth = binary_bits(&scene)?;
            let out = coded_trial(cfg, &scene, n, cfg.snr_db[p], seed)?;
            Ok((metrics::ber(&truth, &out.pixels)?, out.diagnostics))
        })
        .collect::<Result<_>>()?;

    let mut table = Table::new(&["snr_db", "ber_mean", "ber_stderr", "bound", "trials"]);
    for (p, &snr) in cfg.snr_db.iter().enumerate() {
        let bers: Vec<f64> = results[p * cfg.trials..(p + 1) * cfg.trials].iter().map(|r| r.0).collect();
        let (mean, se) = mean_stderr(&bers);
        let bound = ldpcgi_core::ber_lower_bound(&bound_params(cfg, n, snr)?)?;
        table.push(vec![num(snr), num(mean), num(se), num(bound), cfg.trials.to_string()]);
    }
    let diags: Vec<Diagnostics> = results.into_iter().map(|r| r.1).collect();
    write_text(&dir.join(DIAGNOSTICS_FILE), &diagnostics_table(&cells, &diags).to_csv())?;
    Ok((table, cells))
}

fn sampling_sweep(cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    let fixed = fixed_scene(cfg)?;
    let k = cfg.k_info();
    let snr = cfg.point_snr_db;
    let cells = grid(cfg, cfg.sampling_list.len(), cfg.trials);
    let results: Vec<(f64, f64, CodedTrial)> = cells
        .par_iter()
        .map(|&(p, _, seed)| {
            let scene = scene_for_trial(cfg, &fixed, seed)?;
            let truth = binary_bits(&scene)?;
            let n = n_for_multiplier(k, cfg.sampling_list[p]);
            let out = coded_trial(cfg, &scene, n, snr, seed)?;
            let ber = metrics::ber(&truth, &out.pixels)?;
            let mse = metrics::mse(
                &GrayImage::from_bits(cfg.width, cfg.height, &truth)?,
                &GrayImage::from_bits(cfg.width, cfg.height, &out.pixels)?,
            )?;
            Ok((ber, mse, out))
        })
        .collect::<Result<_>>()?;

    let mut table = Table::new(&["multiplier", "n_total", "ber_mean", "ber_stderr", "psnr_db", "trials"]);
    for (p, &mult) in cfg.sampling_list.iter().enumerate() {
        let cell = &results[p * cfg.trials..(p + 1) * cfg.trials];
        let bers: Vec<f64> = cell.iter().map(|r| r.0).collect();
        let (mean, se) = mean_stderr(&bers);
        let mse = cell.iter().map(|r| r.1).sum::<f64>() / cell.len() as f64;
        let psnr = metrics::psnr_from_mse(mse)?;
        table.push(vec![
            num(mult),
            n_for_multiplier(k, mult).to_string(),
            num(mean),
            num(se),
            num(psnr),
            cfg.trials.to_string(),
        ]);
        let image = GrayImage::from_bits(cfg.width, cfg.height, &cell[0].2.pixels)?;
        pgm::write_gray(&dir.join(image_name("ldpc", snr, mult, 0)), &image)?;
    }
    let diags: Vec<Diagnostics> = results.into_iter().map(|r| r.2.diagnostics).collect();
    write_text(&dir.join(DIAGNOSTICS_FILE), &diagnostics_table(&cells, &diags).to_csv())?;
    Ok((table, cells))
}

/// Per-trial images and error rates for one method.
struct MethodResult {
    ber: f64,
    psnr: f64,
    image: GrayImage,
    raw: Option<Vec<f64>>,
}

pub const COMPARE_METHODS: [Method; 4] = [Method::Ldpc, Method::Cgi, Method::Dgi, Method::Pinv];

fn baseline_compare(cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    let fixed = fixed_scene(cfg)?;
    let (w, h) = (cfg.width, cfg.height);
    let n = cfg.n_total();
    let snr = cfg.point_snr_db;
    let cells = grid(cfg, 1, cfg.trials);
    let results: Vec<(Vec<MethodResult>, Diagnostics, SceneImage)> = cells
        .par_iter()
        .map(|&(_, _, seed)| {
            let scene = scene_for_trial(cfg, &fixed, seed)?;
            let truth_bits = binary_bits(&scene)?;
            let truth = GrayImage::from_bits(w, h, &truth_bits)?;
            let coded = coded_trial(cfg, &scene, n, snr, seed)?;
            let ldpc_image = GrayImage::from_bits(w, h, &coded.pixels)?;
            let mut per_method = vec![MethodResult {
                ber: metrics::ber(&truth_bits, &coded.pixels)?,
                psnr: metrics::psnr(&truth, &ldpc_image)?,
                image: ldpc_image,
                raw: None,
            }];

            let ens = match cfg.baseline_ensemble {
                BaselineEnsemble::Speckle => {
                    random_speckle(scene.len(), n, cfg.baseline_duty, substream(seed, Stream::Speckle))?
                }
                BaselineEnsemble::Coded => patterns_from_generator(&coded.generator),
            };
            let m = sense(&ens, &scene, &channel(cfg, snr), substream(seed, Stream::BaselineNoise))?;
            for recon in [cgi_reconstruct(&ens, &m)?, dgi_reconstruct(&ens, &m)?, pinv_reconstruct(&ens, &m)?] {
                let image = normalize_image(w, h, &recon.image)?;
                per_method.push(MethodResult {
                    ber: metrics::ber(&truth_bits, &binarize(&recon.image))?,
                    psnr: metrics::psnr(&truth, &image)?,
                    image,
                    raw: Some(recon.image),
                });
            }
            Ok((per_method, coded.diagnostics, scene))
        })
        .collect::<Result<_>>()?;

    let mult = cfg.sampling_rate();
    let mut table = Table::new(&["method", "trial", "ber", "psnr_db"]);
    for (mi, method) in COMPARE_METHODS.iter().enumerate() {
        for (t, (per_method, _, _)) in results.iter().enumerate() {
            let r = &per_method[mi];
            table.push(vec![method.name().to_string(), t.to_string(), num(r.ber), num(r.psnr)]);
            let name = image_name(method.name(), snr, mult, t);
            pgm::write_gray(&dir.join(&name), &r.image)?;
            if let Some(raw) = &r.raw {
                write_text(&dir.join(name.replace(".pgm", ".csv")), &values_csv(raw))?;
            }
        }
    }
    pgm::write_scene(&dir.join("truth_t0.pgm"), &results[0].2, true)?;
    let diags: Vec<Diagnostics> = results.iter().map(|r| r.1.clone()).collect();
    write_text(&dir.join(DIAGNOSTICS_FILE), &diagnostics_table(&cells, &diags).to_csv())?;
    Ok((table, cells))
}

/// A binary frame with each pixel lit with probability equal to its reflectance.
pub fn dither_frame(scene: &SceneImage, seed: u64) -> Result<SceneImage> {
    let mut rng = seeded(seed);
    let bits: Vec<u8> = scene
        .reflectance()
        .iter()
        .map(|&v| u8::from(rng.random::<f64>() < v))
        .collect();
    Ok(SceneImage::from_bits(scene.width(), scene.height(), &bits)?)
}

/// Stacked image of the coded decodes of `2^gray_bits` dithered frames.
pub fn grayscale_frames(cfg: &RunConfig, scene: &SceneImage) -> Result<(FrameStack, Cells, Vec<Diagnostics>)> {
    let frames = required_frames(cfg.gray_bits)?;
    let cells = grid(cfg, 1, frames);
    let n = cfg.n_total();
    let decoded: Vec<CodedTrial> = cells
        .par_iter()
        .map(|&(_, _, seed)| {
            let frame = dither_frame(scene, substream(seed, Stream::Scene))?;
            coded_trial(cfg, &frame, n, cfg.point_snr_db, seed)
        })
        .collect::<Result<_>>()?;
    let mut stack = FrameStack::new(scene.width(), scene.height());
    let mut diags = Vec::with_capacity(decoded.len());
    for d in decoded {
        stack.push(d.pixels)?;
        diags.push(d.diagnostics);
    }
    Ok((stack, cells, diags))
}

fn grayscale(cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    let scene = scenes::resolve(&cfg.scene, cfg.width, cfg.height, cfg.seed)?;
    let truth = GrayImage::new(cfg.width, cfg.height, scene.reflectance().to_vec())?;
    let (stack, cells, diags) = grayscale_frames(cfg, &scene)?;
    let mut table = Table::new(&["frames", "mae"]);
    let mut count = 1;
    while count <= stack.count() {
        let img = grayscale_stack(&stack.prefix(count))?;
        table.push(vec![count.to_string(), num(metrics::mean_abs_error(&truth, &img)?)]);
        count *= 2;
    }
    let stacked = grayscale_stack(&stack)?;
    let mult = cfg.sampling_rate();
    pgm::write_gray(&dir.join(image_name("stack", cfg.point_snr_db, mult, 0)), &stacked)?;
    pgm::write_gray(&dir.join("truth_t0.pgm"), &truth)?;
    write_text(&dir.join("stack_values.csv"), &values_csv(stacked.values()))?;
    write_text(&dir.join(DIAGNOSTICS_FILE), &diagnostics_table(&cells, &diags).to_csv())?;
    Ok((table, cells))
}

pub fn bound_table(cfg: &RunConfig) -> Result<Table> {
    let n = cfg.n_total();
    let mut table = Table::new(&["snr_db", "gamma", "p_ray", "p_e", "p_b"]);
    for &snr in &cfg.snr_db {
        let BoundTerms { gamma, p_ray, p_e, p_b } = bound_terms(&bound_params(cfg, n, snr)?)?;
        table.push(vec![num(snr), num(gamma), num(p_ray), num(p_e), num(p_b)]);
    }
    Ok(table)
}

fn bound_sweep(cfg: &RunConfig) -> Result<Table> {
    bound_table(cfg)
}
