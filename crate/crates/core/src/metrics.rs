//! Image quality metrics and grayscale reconstruction by frame averaging.

use alloc::vec::Vec;

use crate::error::{check_len, Error, Result};

/// Grayscale image with values in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidShape("image dimensions must be positive"));
        }
        check_len(width * height, values.len())?;
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidParameter("gray value outside [0, 1]"));
        }
        Ok(GrayImage { width, height, values })
    }

    pub fn from_bits(width: usize, height: usize, bits: &[u8]) -> Result<Self> {
        Self::new(width, height, bits.iter().map(|&b| f64::from(b & 1)).collect())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// 8-bit levels `round(255 v)`.
    pub fn to_u8(&self) -> Vec<u8> {
        self.values
            .iter()
            .map(|&v| libm::round(255.0 * v) as u8)
            .collect()
    }
}

/// Fraction of positions where the two bit vectors differ.
pub fn ber(truth: &[u8], decoded: &[u8]) -> Result<f64> {
    check_len(truth.len(), decoded.len())?;
    if truth.is_empty() {
        return Err(Error::InvalidShape("empty bit vectors"));
    }
    let errors = truth.iter().zip(decoded).filter(|(a, b)| a != b).count();
    Ok(errors as f64 / truth.len() as f64)
}

/// Min-max normalization to `[0, 1]`; a constant image maps to all zeros.
pub fn normalize(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return alloc::vec![0.0; values.len()];
    }
    let span = hi - lo;
    values.iter().map(|&v| ((v - lo) / span).clamp(0.0, 1.0)).collect()
}

pub fn normalize_image(width: usize, height: usize, values: &[f64]) -> Result<GrayImage> {
    if values.is_empty() {
        return Err(Error::InvalidShape("empty image"));
    }
    GrayImage::new(width, height, normalize(values))
}

pub fn mse(truth: &GrayImage, recon: &GrayImage) -> Result<f64> {
    if truth.width != recon.width || truth.height != recon.height {
        return Err(Error::InvalidShape("image dimensions differ"));
    }
    let sum: f64 = truth
        .values
        .iter()
        .zip(&recon.values)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / truth.values.len() as f64)
}

pub fn mean_abs_error(truth: &GrayImage, recon: &GrayImage) -> Result<f64> {
    if truth.width != recon.width || truth.height != recon.height {
        return Err(Error::InvalidShape("image dimensions differ"));
    }
    let sum: f64 = truth
        .values
        .iter()
        .zip(&recon.values)
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(sum / truth.values.len() as f64)
}

/// PSNR in dB for unit peak. Identical images give `f64::INFINITY`.
pub fn psnr(truth: &GrayImage, recon: &GrayImage) -> Result<f64> {
    psnr_from_mse(mse(truth, recon)?)
}

pub fn psnr_from_mse(mse: f64) -> Result<f64> {
    if !(mse >= 0.0) {
        return Err(Error::InvalidParameter("MSE must be non-negative"));
    }
    Ok(if mse == 0.0 { f64::INFINITY } else { -10.0 * libm::log10(mse) })
}

/// Binary frames of identical shape to be averaged into a grayscale image.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameStack {
    width: usize,
    height: usize,
    frames: Vec<Vec<u8>>,
}

impl FrameStack {
    pub fn new(width: usize, height: usize) -> Self {
        FrameStack { width, height, frames: Vec::new() }
    }

    pub fn push(&mut self, frame: Vec<u8>) -> Result<()> {
        check_len(self.width * self.height, frame.len())?;
        crate::code::check_binary(&frame)?;
        self.frames.push(frame);
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.frames.len()
    }

    pub fn frames(&self) -> &[Vec<u8>] {
        &self.frames
    }

    /// Stack of the first `count` frames.
    pub fn prefix(&self, count: usize) -> FrameStack {
        FrameStack {
            width: self.width,
            height: self.height,
            frames: self.frames[..count.min(self.frames.len())].to_vec(),
        }
    }
}

/// Per-pixel mean of the binary frames; values lie on `{0, 1/count, ..., 1}`.
pub fn grayscale_stack(stack: &FrameStack) -> Result<GrayImage> {
    if stack.frames.is_empty() {
        return Err(Error::InvalidShape("frame stack is empty"));
    }
    let mut lit = alloc::vec![0usize; stack.width * stack.height];
    for f in &stack.frames {
        for (acc, &b) in lit.iter_mut().zip(f) {
            *acc += usize::from(b);
        }
    }
    let count = stack.frames.len() as f64;
    GrayImage::new(stack.width, stack.height, lit.iter().map(|&c| c as f64 / count).collect())
}

/// Frames needed for an `bits`-bit grayscale image: `2^bits`.
pub fn required_frames(bits: u32) -> Result<usize> {
    if bits == 0 || bits >= usize::BITS {
        return Err(Error::InvalidParameter("bit depth must be in 1..usize::BITS"));
    }
    Ok(1usize << bits)
}
