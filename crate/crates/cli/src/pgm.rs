//! Netpbm graymaps: P2 (ASCII) and P5 (binary), 8- or 16-bit.

use std::fs;
use std::path::Path;

use ldpcgi_core::{GrayImage, SceneImage};

use crate::error::{CliError, Result};

/// Decoded graymap with its maxval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graymap {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub pixels: Vec<u16>,
}

impl Graymap {
    /// Reflectance `gray / maxval`.
    pub fn to_scene(&self) -> Result<SceneImage> {
        let scale = f64::from(self.maxval);
        let values = self.pixels.iter().map(|&p| f64::from(p) / scale).collect();
        Ok(SceneImage::new(self.width, self.height, values)?)
    }
}

/// Skip whitespace and `#` comments, then read one header token.
fn header_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    (start < *pos).then(|| &bytes[start..*pos])
}

fn parse_num(tok: Option<&[u8]>) -> Option<usize> {
    std::str::from_utf8(tok?).ok()?.parse().ok()
}

pub fn decode(bytes: &[u8]) -> std::result::Result<Graymap, String> {
    let mut pos = 0;
    let magic = header_token(bytes, &mut pos).ok_or("missing magic")?;
    let binary = match magic {
        b"P5" => true,
        b"P2" => false,
        _ => return Err("not a P2/P5 graymap".into()),
    };
    let width = parse_num(header_token(bytes, &mut pos)).ok_or("bad width")?;
    let height = parse_num(header_token(bytes, &mut pos)).ok_or("bad height")?;
    let maxval = parse_num(header_token(bytes, &mut pos)).ok_or("bad maxval")?;
    if width == 0 || height == 0 || maxval == 0 || maxval > 65535 {
        return Err("dimensions or maxval out of range".into());
    }
    let count = width * height;
    let pixels = if binary {
        // Exactly one whitespace byte separates the header from the raster.
        pos += 1;
        let raster = bytes.get(pos..).ok_or("truncated raster")?;
        if maxval < 256 {
            if raster.len() < count {
                return Err("truncated raster".into());
            }
            raster[..count].iter().map(|&b| u16::from(b)).collect::<Vec<_>>()
        } else {
            if raster.len() < 2 * count {
                return Err("truncated raster".into());
            }
            raster[..2 * count]
                .chunks_exact(2)
                .map(|c| u16::from_be_bytes([c[0], c[1]]))
                .collect()
        }
    } else {
        let mut px = Vec::with_capacity(count);
        for _ in 0..count {
            let v = parse_num(header_token(bytes, &mut pos)).ok_or("truncated raster")?;
            px.push(v as u16);
        }
        px
    };
    if pixels.iter().any(|&p| usize::from(p) > maxval) {
        return Err("sample exceeds maxval".into());
    }
    Ok(Graymap { width, height, maxval: maxval as u16, pixels })
}

pub fn read(path: &Path) -> Result<Graymap> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    decode(&bytes).map_err(|reason| CliError::format(path, reason))
}

pub fn read_scene(path: &Path) -> Result<SceneImage> {
    read(path)?.to_scene()
}

/// 8-bit graymap bytes, binary (P5) or ASCII (P2).
pub fn encode(width: usize, height: usize, levels: &[u8], binary: bool) -> Vec<u8> {
    let mut out = format!("{}\n{} {}\n255\n", if binary { "P5" } else { "P2" }, width, height).into_bytes();
    if binary {
        out.extend_from_slice(levels);
    } else {
        for row in levels.chunks(width) {
            let line: Vec<String> = row.iter().map(u8::to_string).collect();
            out.extend_from_slice(line.join(" ").as_bytes());
            out.push(b'\n');
        }
    }
    out
}

pub fn write_gray(path: &Path, image: &GrayImage) -> Result<()> {
    let bytes = encode(image.width(), image.height(), &image.to_u8(), true);
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn write_scene(path: &Path, scene: &SceneImage, binary: bool) -> Result<()> {
    let levels: Vec<u8> = scene
        .reflectance()
        .iter()
        .map(|&v| (255.0 * v).round() as u8)
        .collect();
    fs::write(path, encode(scene.width(), scene.height(), &levels, binary)).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_with_comments() {
        let text = b"P2\n# made by hand\n3 2\n# max\n255\n0 128 255\n 10 20 30\n";
        let g = decode(text).unwrap();
        assert_eq!((g.width, g.height, g.maxval), (3, 2, 255));
        assert_eq!(g.pixels, vec![0, 128, 255, 10, 20, 30]);
        let scene = g.to_scene().unwrap();
        assert_eq!(scene.reflectance()[2], 1.0);
    }

    #[test]
    fn binary_roundtrip() {
        let levels = [0u8, 255, 7, 200, 13, 99];
        for binary in [true, false] {
            let bytes = encode(3, 2, &levels, binary);
            let g = decode(&bytes).unwrap();
            assert_eq!(g.pixels, levels.iter().map(|&b| u16::from(b)).collect::<Vec<_>>());
        }
    }

    #[test]
    fn sixteen_bit_raster() {
        let mut bytes = b"P5 2 1 1000\n".to_vec();
        bytes.extend_from_slice(&[0x03, 0xE8, 0x01, 0xF4]);
        let g = decode(&bytes).unwrap();
        assert_eq!(g.pixels, vec![1000, 500]);
        assert_eq!(g.to_scene().unwrap().reflectance(), &[1.0, 0.5]);
    }

    #[test]
    fn rejects_garbage() {
        assert!(decode(b"P6 1 1 255\n\0\0\0").is_err());
        assert!(decode(b"P5 4 4 255\n\0\0").is_err());
        assert!(decode(b"P2 2 1 10\n3 11\n").is_err());
    }
}
