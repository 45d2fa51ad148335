//! Builtin synthetic scenes.

use std::path::Path;

use ldpcgi_core::{rng::seeded, SceneImage};
use rand::Rng;

use crate::error::{CliError, Result};
use crate::pgm;

pub const BUILTIN: &[&str] = &["glyphs", "radial", "checker", "allzero"];

// 5x7 bitmaps, one row per string, for the four glyph letters.
const FONT: [[&str; 7]; 4] = [
    ["#....", "#....", "#....", "#....", "#....", "#....", "#####"],
    ["####.", "#...#", "#...#", "#...#", "#...#", "#...#", "####."],
    ["####.", "#...#", "#...#", "####.", "#....", "#....", "#...."],
    [".####", "#....", "#....", "#....", "#....", "#....", ".####"],
];
// Four letters of 5 columns, 1-column gaps, 1-cell margin around.
const CANVAS_W: usize = 1 + 4 * 5 + 3 + 1;
const CANVAS_H: usize = 1 + 7 + 1;

fn glyph_cell(cx: usize, cy: usize) -> bool {
    if cy == 0 || cy > 7 || cx == 0 {
        return false;
    }
    let (x, y) = (cx - 1, cy - 1);
    let (letter, col) = (x / 6, x % 6);
    letter < 4 && col < 5 && FONT[letter][y].as_bytes()[col] == b'#'
}

fn glyphs(w: usize, h: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            // Sample the canvas at pixel centres.
            let cx = (2 * x + 1) * CANVAS_W / (2 * w);
            let cy = (2 * y + 1) * CANVAS_H / (2 * h);
            v.push(if glyph_cell(cx, cy) { 1.0 } else { 0.0 });
        }
    }
    v
}

/// Shaded sphere plus a specular spot; a decreasing function of the
/// distance from pixel `(w/2, h/2)`.
fn radial(w: usize, h: usize) -> Vec<f64> {
    let (cx, cy) = ((w / 2) as f64, (h / 2) as f64);
    let radius = 0.45 * w.min(h) as f64;
    let spot = 0.15 * w.min(h) as f64;
    let mut v = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let r = (x as f64 - cx).hypot(y as f64 - cy);
            let u = r / radius;
            let value = if u < 1.0 {
                0.15 + 0.6 * (1.0 - u * u).sqrt() + 0.25 * (-(r / spot).powi(2)).exp()
            } else {
                0.0
            };
            v.push(value.min(1.0));
        }
    }
    v
}

fn checker(w: usize, h: usize) -> Vec<f64> {
    let bw = (w / 8).max(1);
    let bh = (h / 8).max(1);
    (0..w * h)
        .map(|i| {
            let (x, y) = (i % w, i / w);
            ((x / bw + y / bh) % 2) as f64
        })
        .collect()
}

pub fn builtin_scene(name: &str, width: usize, height: usize) -> Result<SceneImage> {
    if width < 8 || height < 8 {
        return Err(CliError::config("scene dimensions must be at least 8x8"));
    }
    let values = match name {
        "glyphs" => glyphs(width, height),
        "radial" => radial(width, height),
        "checker" => checker(width, height),
        "allzero" => vec![0.0; width * height],
        _ => {
            return Err(CliError::config(format!(
                "unknown scene {name:?}; builtin: {}, random, or a .pgm path",
                BUILTIN.join(", ")
            )))
        }
    };
    Ok(SceneImage::new(width, height, values)?)
}

/// Independent fair bits.
pub fn random_scene(width: usize, height: usize, seed: u64) -> Result<SceneImage> {
    let mut rng = seeded(seed);
    let bits: Vec<u8> = (0..width * height).map(|_| u8::from(rng.random::<bool>())).collect();
    Ok(SceneImage::from_bits(width, height, &bits)?)
}

/// Resolve a configured scene source. `random` draws from `seed`.
pub fn resolve(source: &str, width: usize, height: usize, seed: u64) -> Result<SceneImage> {
    if source == "random" {
        return random_scene(width, height, seed);
    }
    if source.ends_with(".pgm") || source.ends_with(".pnm") {
        let scene = pgm::read_scene(Path::new(source))?;
        if (scene.width(), scene.height()) != (width, height) {
            return Err(CliError::config(format!(
                "{source}: image is {}x{}, config asks for {width}x{height}",
                scene.width(),
                scene.height()
            )));
        }
        return Ok(scene);
    }
    builtin_scene(source, width, height)
}

/// Whether a scene source changes from trial to trial.
pub fn is_per_trial(source: &str) -> bool {
    source == "random"
}
