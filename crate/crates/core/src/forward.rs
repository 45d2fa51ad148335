//! Illumination ensembles and the bucket-detector measurement model.
//!
//! Measurement `n` observes `R_n = |h_n| sqrt(E_s) s_n + w_n` where `s_n` is
//! the summed reflectance under pattern `n`, `|h_n|` a per-shot Rayleigh
//! magnitude with unit second moment and `w_n ~ N(0, N_0 / 2)`.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::code::GeneratorMatrix;
use crate::error::{check_len, Error, Result};
use crate::rng::seeded;

/// A `width x height` reflectance map in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneImage {
    width: usize,
    height: usize,
    reflectance: Vec<f64>,
}

impl SceneImage {
    pub fn new(width: usize, height: usize, reflectance: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidShape("scene dimensions must be positive"));
        }
        check_len(width * height, reflectance.len())?;
        if reflectance.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidParameter("reflectance outside [0, 1]"));
        }
        Ok(SceneImage { width, height, reflectance })
    }

    pub fn from_bits(width: usize, height: usize, bits: &[u8]) -> Result<Self> {
        crate::code::check_binary(bits)?;
        Self::new(width, height, bits.iter().map(|&b| f64::from(b)).collect())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.reflectance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reflectance.is_empty()
    }

    pub fn reflectance(&self) -> &[f64] {
        &self.reflectance
    }

    pub fn is_binary(&self) -> bool {
        self.reflectance.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// Pixel values as bits; `None` unless every value is exactly 0 or 1.
    pub fn to_bits(&self) -> Option<Vec<u8>> {
        self.is_binary()
            .then(|| self.reflectance.iter().map(|&v| u8::from(v == 1.0)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternSource {
    Coded,
    Speckle,
}

/// `N` binary illumination patterns over `K` pixels, each stored as the
/// sorted set of lit pixel indices.
#[derive(Debug, Clone, PartialEq)]
pub struct IlluminationEnsemble {
    k_pixels: usize,
    patterns: Vec<Vec<usize>>,
    source: PatternSource,
}

impl IlluminationEnsemble {
    pub fn new(k_pixels: usize, mut patterns: Vec<Vec<usize>>, source: PatternSource) -> Result<Self> {
        if k_pixels == 0 || patterns.is_empty() {
            return Err(Error::InvalidShape("ensemble needs K >= 1 and N >= 1"));
        }
        for p in &mut patterns {
            p.sort_unstable();
            p.dedup();
            if p.last().is_some_and(|&i| i >= k_pixels) {
                return Err(Error::InvalidShape("pattern index out of range"));
            }
        }
        Ok(IlluminationEnsemble { k_pixels, patterns, source })
    }

    pub fn k_pixels(&self) -> usize {
        self.k_pixels
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn patterns(&self) -> &[Vec<usize>] {
        &self.patterns
    }

    pub fn source(&self) -> PatternSource {
        self.source
    }

    /// Lit fraction over all patterns and pixels.
    pub fn duty_ratio(&self) -> f64 {
        let lit: usize = self.patterns.iter().map(Vec::len).sum();
        lit as f64 / (self.patterns.len() * self.k_pixels) as f64
    }

    /// Lit fraction over the patterns `range` only.
    pub fn duty_ratio_of(&self, range: core::ops::Range<usize>) -> f64 {
        let count = range.len();
        let lit: usize = self.patterns[range].iter().map(Vec::len).sum();
        lit as f64 / (count * self.k_pixels) as f64
    }

    /// Number of patterns covering each pixel.
    pub fn pixel_degrees(&self) -> Vec<usize> {
        let mut deg = alloc::vec![0usize; self.k_pixels];
        for p in &self.patterns {
            for &i in p {
                deg[i] += 1;
            }
        }
        deg
    }

    /// A copy with pixel `i` renamed to `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_len(self.k_pixels, perm.len())?;
        let patterns = self
            .patterns
            .iter()
            .map(|p| p.iter().map(|&i| perm[i]).collect())
            .collect();
        Self::new(self.k_pixels, patterns, self.source)
    }

    /// `s_n`: summed reflectance under each pattern.
    pub fn pattern_sums(&self, values: &[f64]) -> Result<Vec<f64>> {
        check_len(self.k_pixels, values.len())?;
        Ok(self
            .patterns
            .iter()
            .map(|p| p.iter().map(|&i| values[i]).sum())
            .collect())
    }
}

/// Identity rows for the systematic part, then one pattern per parity column.
pub fn patterns_from_generator(g: &GeneratorMatrix) -> IlluminationEnsemble {
    let k = g.k_info();
    let patterns = (0..k)
        .map(|i| alloc::vec![i])
        .chain(g.parity_columns().iter().cloned())
        .collect();
    IlluminationEnsemble { k_pixels: k, patterns, source: PatternSource::Coded }
}

/// Independent Bernoulli(`duty`) speckle. Patterns may come out empty at low duty.
pub fn random_speckle(k: usize, n: usize, duty: f64, seed: u64) -> Result<IlluminationEnsemble> {
    if !(duty > 0.0 && duty <= 1.0) {
        return Err(Error::InvalidParameter("duty must lie in (0, 1]"));
    }
    if k == 0 || n == 0 {
        return Err(Error::InvalidShape("ensemble needs K >= 1 and N >= 1"));
    }
    let mut rng = seeded(seed);
    let patterns = (0..n)
        .map(|_| (0..k).filter(|_| rng.random::<f64>() < duty).collect())
        .collect();
    Ok(IlluminationEnsemble { k_pixels: k, patterns, source: PatternSource::Speckle })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fading {
    None,
    Rayleigh,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Symbol energy per illuminated pixel (linear).
    pub es: f64,
    /// Noise spectral density (linear); real noise variance is `n0 / 2`.
    pub n0: f64,
    pub fading: Fading,
    /// Whether the receiver sees the per-shot fading magnitudes.
    pub csi_known: bool,
}

impl ChannelParams {
    pub fn new(es: f64, n0: f64, fading: Fading) -> Result<Self> {
        let ch = ChannelParams { es, n0, fading, csi_known: true };
        ch.validate()?;
        Ok(ch)
    }

    /// Unit noise density with `E_s` set from an SNR in dB.
    pub fn from_snr_db(snr_db: f64, fading: Fading) -> Self {
        ChannelParams { es: snr_db_to_linear(snr_db), n0: 1.0, fading, csi_known: true }
    }

    pub fn with_csi(mut self, csi_known: bool) -> Self {
        self.csi_known = csi_known;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.es > 0.0 && self.es.is_finite()) {
            return Err(Error::InvalidParameter("E_s must be positive"));
        }
        if !(self.n0 >= 0.0 && self.n0.is_finite()) {
            return Err(Error::InvalidParameter("N_0 must be non-negative"));
        }
        Ok(())
    }

    /// `E_s / N_0`; infinite for a noiseless channel.
    pub fn gamma(&self) -> f64 {
        if self.n0 > 0.0 {
            self.es / self.n0
        } else {
            f64::INFINITY
        }
    }

    pub fn noise_std(&self) -> f64 {
        libm::sqrt(self.n0 / 2.0)
    }

    /// The fading magnitude the receiver uses for shot `n`.
    pub fn receiver_gain(&self, true_mag: f64) -> f64 {
        match (self.fading, self.csi_known) {
            (Fading::Rayleigh, false) => RAYLEIGH_MEAN,
            _ => true_mag,
        }
    }
}

/// `E|h|` for a unit-second-moment Rayleigh magnitude, `sqrt(pi) / 2`.
pub const RAYLEIGH_MEAN: f64 = 0.886_226_925_452_758;

/// Noiseless return of a pattern with summed reflectance `count`.
#[inline]
pub fn mean_return(h_mag: f64, es: f64, count: f64) -> f64 {
    h_mag * libm::sqrt(es) * count
}

/// One sensing run: bucket values, true fading magnitudes, channel and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub bucket: Vec<f64>,
    pub fading_mag: Vec<f64>,
    pub channel: ChannelParams,
    pub seed: u64,
}

impl Measurement {
    pub fn new(bucket: Vec<f64>, fading_mag: Vec<f64>, channel: ChannelParams, seed: u64) -> Result<Self> {
        check_len(bucket.len(), fading_mag.len())?;
        if fading_mag.iter().any(|&h| !(h >= 0.0)) {
            return Err(Error::InvalidParameter("fading magnitude must be non-negative"));
        }
        channel.validate()?;
        Ok(Measurement { bucket, fading_mag, channel, seed })
    }

    pub fn len(&self) -> usize {
        self.bucket.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bucket.is_empty()
    }

    /// Fading magnitudes as seen by the receiver (true values, or the mean without CSI).
    pub fn receiver_gains(&self) -> Vec<f64> {
        self.fading_mag
            .iter()
            .map(|&h| self.channel.receiver_gain(h))
            .collect()
    }
}

/// Synthesize bucket measurements of `scene` under `ens` through channel `ch`.
pub fn sense(
    ens: &IlluminationEnsemble,
    scene: &SceneImage,
    ch: &ChannelParams,
    seed: u64,
) -> Result<Measurement> {
    ch.validate()?;
    let sums = ens.pattern_sums(scene.reflectance())?;
    let mut rng = seeded(seed);
    let noise_std = ch.noise_std();
    let mut bucket = Vec::with_capacity(sums.len());
    let mut fading_mag = Vec::with_capacity(sums.len());
    for s in sums {
        let h = match ch.fading {
            Fading::None => 1.0,
            Fading::Rayleigh => rayleigh_magnitude(&mut rng),
        };
        let w = if noise_std > 0.0 {
            let z: f64 = StandardNormal.sample(&mut rng);
            noise_std * z
        } else {
            0.0
        };
        bucket.push(mean_return(h, ch.es, s) + w);
        fading_mag.push(h);
    }
    Ok(Measurement { bucket, fading_mag, channel: *ch, seed })
}

/// Send codeword bits as on-off symbols of amplitude `sqrt(E_s)` through the
/// same fading and noise model. This is the binary-symbol view used with the
/// GF(2) decoder; a physical bucket detector sees [`sense`] instead.
pub fn transmit_codeword(word: &[u8], ch: &ChannelParams, seed: u64) -> Result<Measurement> {
    ch.validate()?;
    crate::code::check_binary(word)?;
    let mut rng = seeded(seed);
    let noise_std = ch.noise_std();
    let mut bucket = Vec::with_capacity(word.len());
    let mut fading_mag = Vec::with_capacity(word.len());
    for &bit in word {
        let h = match ch.fading {
            Fading::None => 1.0,
            Fading::Rayleigh => rayleigh_magnitude(&mut rng),
        };
        let z: f64 = StandardNormal.sample(&mut rng);
        bucket.push(mean_return(h, ch.es, f64::from(bit)) + noise_std * z);
        fading_mag.push(h);
    }
    Ok(Measurement { bucket, fading_mag, channel: *ch, seed })
}

/// `|h|` for `h ~ CN(0, 1)`: both quadratures have variance 1/2.
pub fn rayleigh_magnitude<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    libm::sqrt((re * re + im * im) / 2.0)
}

pub fn snr_db_to_linear(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}

pub fn snr_linear_to_db(x: f64) -> Result<f64> {
    if x > 0.0 {
        Ok(10.0 * libm::log10(x))
    } else {
        Err(Error::InvalidParameter("linear SNR must be positive"))
    }
}
