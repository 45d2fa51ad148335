use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ldpcgi::config::RunConfig;
use ldpcgi::experiments::{self, Experiment};
use ldpcgi::formats;
use ldpcgi::pgm;
use ldpcgi_core::{ber_lower_bound, sense, ChannelParams, Fading};

fn ldpcgi(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ldpcgi")).args(args).current_dir(cwd).output().unwrap()
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn file_pipeline_recovers_glyphs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let common = ["--out", "work", "--set", "fading=none", "--set", "point_snr_db=25"];
    let run = |extra: &[&str]| {
        let mut args: Vec<&str> = extra.to_vec();
        args.extend_from_slice(&common);
        ok(&ldpcgi(&args, d))
    };
    run(&["gen-code"]);
    run(&["encode", "--code", "work/code.txt"]);
    run(&["sense", "--code", "work/code.txt"]);
    let diag = run(&["decode", "--code", "work/code.txt", "--measurement", "work/measurement.csv"]);
    assert!(diag.starts_with("iterations_run,converged,residual,unpinned_pixel_count\n"));
    run(&["scene"]);

    let scene = pgm::read(&d.join("work/scene.pgm")).unwrap();
    let decoded = pgm::read(&d.join("work/decoded.pgm")).unwrap();
    assert_eq!(scene, decoded);

    let codeword = fs::read_to_string(d.join("work/codeword.txt")).unwrap();
    assert_eq!(codeword.trim_end().len(), 512);
    let g = formats::read_generator(&d.join("work/code.txt")).unwrap();
    let bits: Vec<u8> = scene.pixels.iter().map(|&p| u8::from(p > 0)).collect();
    let want: String = g.encode(&bits).unwrap().iter().map(|b| b.to_string()).collect();
    assert_eq!(codeword.trim_end(), want);

    let marginals = fs::read_to_string(d.join("work/decoded.csv")).unwrap();
    assert!(marginals.starts_with("index,value\n"));
    assert_eq!(marginals.lines().count(), 257);
}

#[test]
fn gf2_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = ["--out", "w", "--set", "decoder.mode=gf2", "--set", "point_snr_db=12", "--set", "fading=none"];
    ok(&ldpcgi(&[&["gen-code"][..], &args].concat(), d));
    ok(&ldpcgi(&[&["sense", "--code", "w/code.txt"][..], &args].concat(), d));
    ok(&ldpcgi(&[&["decode", "--code", "w/code.txt", "--measurement", "w/measurement.csv"][..], &args].concat(), d));
    ok(&ldpcgi(&[&["scene"][..], &args].concat(), d));
    assert_eq!(pgm::read(&d.join("w/scene.pgm")).unwrap(), pgm::read(&d.join("w/decoded.pgm")).unwrap());
}

#[test]
fn generator_and_measurement_files_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&ldpcgi(&["gen-code", "--output", "g.txt", "--set", "degree=0.5x^3+0.5x^7"], d));
    let text = fs::read_to_string(d.join("g.txt")).unwrap();
    let g = formats::generator_from_str(&text).unwrap();
    assert_eq!(formats::generator_to_string(&g), text);

    let scene = ldpcgi::scenes::builtin_scene("checker", 16, 16).unwrap();
    let ens = ldpcgi_core::patterns_from_generator(&g);
    let ch = ChannelParams::from_snr_db(3.0, Fading::Rayleigh).with_csi(false);
    let m = sense(&ens, &scene, &ch, 77).unwrap();
    let path = d.join("sub/m.csv");
    formats::write_measurement(&path, &m).unwrap();
    assert_eq!(formats::read_measurement(&path).unwrap(), m);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(ldpcgi(&["bound", "--set", "colour=red"], d).status.code(), Some(2));
    assert_eq!(ldpcgi(&["bound", "--preset", "nope"], d).status.code(), Some(2));
    assert_eq!(ldpcgi(&["bound", "--set", "trials=0"], d).status.code(), Some(2));
    assert_eq!(ldpcgi(&["bound", "--config", "missing.txt"], d).status.code(), Some(3));
    fs::write(d.join("bad.txt"), "3 5 2 0\n0 9\n").unwrap();
    assert_eq!(ldpcgi(&["encode", "--code", "bad.txt"], d).status.code(), Some(3));
    assert_eq!(ldpcgi(&["no-such-command"], d).status.code(), Some(2));
    fs::write(d.join("cfg.txt"), "# comment\nwidth = 8\nheight = 8\n").unwrap();
    assert_eq!(ldpcgi(&["bound", "--config", "cfg.txt", "--out", "o"], d).status.code(), Some(0));
}

#[test]
fn ber_sweep_bound_column_matches_bound_module() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig { out: dir.path().to_path_buf(), trials: 2, ..RunConfig::default() };
    let before = cfg.clone();
    let out = experiments::run_ber_sweep(&cfg).unwrap();
    assert_eq!(cfg, before);
    assert_eq!(out.table.header, ["snr_db", "ber_mean", "ber_stderr", "bound", "trials"]);
    assert_eq!(out.table.rows.len(), 8);
    for row in &out.table.rows {
        let snr: f64 = row[0].parse().unwrap();
        let p = experiments::bound_params(&cfg, 512, snr).unwrap();
        assert_eq!(row[3], ber_lower_bound(&p).unwrap().to_string());
        assert_eq!(row[4], "2");
    }
    let csv = fs::read_to_string(out.dir.join("results.csv")).unwrap();
    assert_eq!(csv, out.table.to_csv());
    let diag = fs::read_to_string(out.dir.join("diagnostics.csv")).unwrap();
    assert_eq!(diag.lines().count(), 1 + 16);
}

#[test]
fn bound_table_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&ldpcgi(&["bound", "--out", "b"], dir.path()));
    assert!(out.starts_with("snr_db,gamma,p_ray,p_e,p_b\n0,1,"));
    assert_eq!(out.lines().count(), 9);
}

#[test]
fn compare_and_sampling_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig { out: dir.path().to_path_buf(), trials: 2, sampling_list: vec![1.0, 3.0], ..RunConfig::default() };
    let cmp = experiments::run(Experiment::Compare, &cfg).unwrap();
    assert_eq!(cmp.table.rows.len(), 8);
    for method in ["ldpc", "cgi", "dgi", "pinv"] {
        for t in 0..2 {
            let name = experiments::image_name(method, 10.0, 2.0, t);
            let img = pgm::read(&cmp.dir.join(&name)).unwrap();
            assert_eq!((img.width, img.height), (16, 16));
            if method != "ldpc" {
                assert!(cmp.dir.join(name.replace(".pgm", ".csv")).exists());
            }
        }
    }
    let sweep = experiments::run(Experiment::SamplingSweep, &cfg).unwrap();
    assert_eq!(sweep.table.column("n_total").unwrap(), ["256", "768"]);
    for m in [1.0, 3.0] {
        assert!(sweep.dir.join(experiments::image_name("ldpc", 10.0, m, 0)).exists());
    }
}

#[test]
fn all_zero_scene_stacks_to_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        out: dir.path().to_path_buf(),
        scene: "allzero".into(),
        point_snr_db: 30.0,
        gray_bits: 3,
        ..RunConfig::default()
    };
    let out = experiments::run_grayscale(&cfg).unwrap();
    assert_eq!(out.table.column("frames").unwrap(), ["1", "2", "4", "8"]);
    assert!(out.table.column("mae").unwrap().iter().all(|v| *v == "0"));
}

#[test]
fn cli_replay_matches() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&ldpcgi(&["sweep-sampling", "--out", "a", "--set", "trials=2", "--set", "sampling_list=1,2"], d));
    ok(&ldpcgi(&["replay", "a/sampling_sweep/manifest.txt", "--out", "b"], d));
    ok(&ldpcgi(&["sweep-sampling", "--config", "a/sampling_sweep/manifest.txt", "--out", "c", "--threads", "1"], d));
    let a = fs::read(d.join("a/sampling_sweep/results.csv")).unwrap();
    assert_eq!(a, fs::read(d.join("b/sampling_sweep/results.csv")).unwrap());
    assert_eq!(a, fs::read(d.join("c/sampling_sweep/results.csv")).unwrap());
    let manifest = fs::read_to_string(d.join("a/sampling_sweep/manifest.txt")).unwrap();
    assert!(manifest.contains("run.experiment = sampling_sweep"));
    assert!(manifest.contains("run.seed.p1.t1 = "));
}
