use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ldpcgi::config::RunConfig;
use ldpcgi::error::{CliError, Result};
use ldpcgi::experiments::{self, channel, Experiment};
use ldpcgi::formats::{self, diagnostics_row, values_csv, write_text, Table, DIAGNOSTICS_HEADER};
use ldpcgi::{pgm, scenes, RunManifest};
use ldpcgi_core::bp::{decode_sum_bp, symbol_llr};
use ldpcgi_core::{
    build_generator, decode_gf2_bp, derive_parity_check, patterns_from_generator, sense, transmit_codeword, BpMode,
    CodeSpec, GrayImage,
};

#[derive(Parser)]
#[command(name = "ldpcgi", version, about = "LDPC-coded computational ghost imaging simulator")]
struct Cli {
    /// Config file (`key = value` lines); run manifests are accepted too.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Named preset applied before the config file (desk, paper-v).
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Extra `key=value` setting; repeatable, applied after the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a generator matrix and write it as text.
    GenCode {
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Encode the configured scene with a generator file.
    Encode {
        #[arg(long)]
        code: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Simulate bucket measurements of the configured scene.
    Sense {
        #[arg(long)]
        code: PathBuf,
        /// SNR in dB; defaults to point_snr_db.
        #[arg(long)]
        snr: Option<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Decode a measurement file.
    Decode {
        #[arg(long)]
        code: PathBuf,
        #[arg(long)]
        measurement: PathBuf,
        /// Output prefix; `.pgm`, `.csv` and `_diagnostics.csv` are appended.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Tabulate the BER lower bound over snr_db.
    Bound,
    /// Empirical BER against the bound over snr_db.
    SweepBer,
    /// BER and PSNR over sampling_list.
    SweepSampling,
    /// Coded decoding against CGI, DGI and PINV.
    Compare,
    /// Stack binary decodes into a grayscale image.
    Grayscale,
    /// Write the configured scene as PGM.
    Scene {
        /// Scene name or path; defaults to the configured scene.
        name: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Re-run the experiment recorded in a manifest.
    Replay { manifest: PathBuf },
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let text = match &cli.config {
        Some(p) => Some(formats::read_text(p)?),
        None => None,
    };
    let mut overrides = Vec::new();
    for s in &cli.set {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("--set expects KEY=VALUE, got {s:?}")))?;
        overrides.push((k.trim().to_string(), v.trim().to_string()));
    }
    if let Some(seed) = cli.seed {
        overrides.push(("seed".into(), seed.to_string()));
    }
    if let Some(out) = &cli.out {
        overrides.push(("out".into(), out.display().to_string()));
    }
    if let Some(t) = cli.threads {
        overrides.push(("threads".into(), t.to_string()));
    }
    ldpcgi::assemble_config(cli.preset.as_deref(), text.as_deref(), &overrides)
}

fn or_default(path: &Option<PathBuf>, cfg: &RunConfig, name: &str) -> PathBuf {
    path.clone().unwrap_or_else(|| cfg.out.join(name))
}

fn bits_string(bits: &[u8]) -> String {
    let mut s: String = bits.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect();
    s.push('\n');
    s
}

fn configured_scene(cfg: &RunConfig) -> Result<ldpcgi_core::SceneImage> {
    scenes::resolve(&cfg.scene, cfg.width, cfg.height, cfg.seed)
}

fn check_code_shape(cfg: &RunConfig, k: usize) -> Result<()> {
    if k != cfg.k_info() {
        return Err(CliError::config(format!("code has K = {k}, scene has {} pixels", cfg.k_info())));
    }
    Ok(())
}

fn report(out: &experiments::RunOutput) {
    print!("{}", out.table.to_csv());
    eprintln!("wrote {}", out.dir.display());
}

fn execute(cli: &Cli) -> Result<()> {
    if let Command::Replay { manifest } = &cli.command {
        let m = RunManifest::read(manifest)?;
        report(&ldpcgi::replay(&m, cli.out.as_deref())?);
        return Ok(());
    }
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::GenCode { output } => {
            let g = build_generator(&CodeSpec::new(cfg.k_info(), cfg.n_total(), cfg.degree.clone(), cfg.seed))?;
            let path = or_default(output, &cfg, "code.txt");
            formats::write_generator(&path, &g)?;
            eprintln!("wrote {}", path.display());
        }
        Command::Encode { code, output } => {
            let g = formats::read_generator(code)?;
            check_code_shape(&cfg, g.k_info())?;
            let bits = configured_scene(&cfg)?
                .to_bits()
                .ok_or_else(|| CliError::config("encoding needs a binary scene"))?;
            let path = or_default(output, &cfg, "codeword.txt");
            write_text(&path, &bits_string(&g.encode(&bits)?))?;
            eprintln!("wrote {}", path.display());
        }
        Command::Sense { code, snr, output } => {
            let g = formats::read_generator(code)?;
            check_code_shape(&cfg, g.k_info())?;
            let scene = configured_scene(&cfg)?;
            let ch = channel(&cfg, snr.unwrap_or(cfg.point_snr_db));
            let m = match cfg.decoder.mode {
                BpMode::SumConstraint => sense(&patterns_from_generator(&g), &scene, &ch, cfg.seed)?,
                BpMode::Gf2 => {
                    let bits = scene
                        .to_bits()
                        .ok_or_else(|| CliError::config("gf2 mode needs a binary scene"))?;
                    transmit_codeword(&g.encode(&bits)?, &ch, cfg.seed)?
                }
            };
            let path = or_default(output, &cfg, "measurement.csv");
            formats::write_measurement(&path, &m)?;
            eprintln!("wrote {}", path.display());
        }
        Command::Decode { code, measurement, output } => {
            let g = formats::read_generator(code)?;
            check_code_shape(&cfg, g.k_info())?;
            let m = formats::read_measurement(measurement)?;
            let result = match cfg.decoder.mode {
                BpMode::SumConstraint => decode_sum_bp(&m, &patterns_from_generator(&g), &cfg.decoder)?,
                BpMode::Gf2 => {
                    let llrs = m
                        .bucket
                        .iter()
                        .zip(m.receiver_gains())
                        .map(|(&r, h)| symbol_llr(r, h, &m.channel))
                        .collect::<ldpcgi_core::Result<Vec<f64>>>()?;
                    decode_gf2_bp(&llrs, &derive_parity_check(&g), &cfg.decoder)?
                }
            };
            let prefix = or_default(output, &cfg, "decoded");
            let with = |suffix: &str| PathBuf::from(format!("{}{suffix}", prefix.display()));
            write_text(&with(".csv"), &values_csv(&result.marginals))?;
            let mut diag = Table::new(DIAGNOSTICS_HEADER);
            diag.push(diagnostics_row(&result.diagnostics));
            write_text(&with("_diagnostics.csv"), &diag.to_csv())?;
            let image = GrayImage::from_bits(cfg.width, cfg.height, &result.pixels)?;
            pgm::write_gray(&with(".pgm"), &image)?;
            print!("{}", diag.to_csv());
        }
        Command::Scene { name, output } => {
            let source = name.as_deref().unwrap_or(&cfg.scene);
            let scene = scenes::resolve(source, cfg.width, cfg.height, cfg.seed)?;
            let path = or_default(output, &cfg, "scene.pgm");
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            }
            pgm::write_scene(&path, &scene, true)?;
            eprintln!("wrote {}", path.display());
        }
        Command::Bound => report(&experiments::run(Experiment::Bound, &cfg)?),
        Command::SweepBer => report(&experiments::run(Experiment::BerSweep, &cfg)?),
        Command::SweepSampling => report(&experiments::run(Experiment::SamplingSweep, &cfg)?),
        Command::Compare => report(&experiments::run(Experiment::Compare, &cfg)?),
        Command::Grayscale => report(&experiments::run(Experiment::Grayscale, &cfg)?),
        Command::Replay { .. } => unreachable!(),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

