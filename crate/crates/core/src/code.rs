//! Systematic LDPC codes over GF(2) with a random sparse parity block.
//!
//! The generator is `G = [I | P]` where `P` is `K x (N-K)`. Only the column
//! supports of `P` are stored; the identity block is implicit.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::error::{check_len, Error, Result};
use crate::rng::{seeded, SimRng};

/// Column-weight distribution `Omega(x) = sum_D Omega_D x^D`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    terms: Vec<(usize, f64)>,
}

impl DegreeDistribution {
    pub fn new(mut terms: Vec<(usize, f64)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidDistribution("no terms"));
        }
        terms.sort_by_key(|&(d, _)| d);
        if terms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidDistribution("repeated degree"));
        }
        if terms.iter().any(|&(d, _)| d == 0) {
            return Err(Error::InvalidDistribution("degree must be positive"));
        }
        if terms.iter().any(|&(_, w)| !(0.0..=1.0).contains(&w)) {
            return Err(Error::InvalidDistribution("weight outside [0, 1]"));
        }
        let total: f64 = terms.iter().map(|&(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution("weights do not sum to 1"));
        }
        Ok(DegreeDistribution { terms })
    }

    /// Point mass `x^D`.
    pub fn regular(degree: usize) -> Result<Self> {
        Self::new(alloc::vec![(degree, 1.0)])
    }

    /// `(degree, weight)` pairs in increasing degree order.
    pub fn terms(&self) -> &[(usize, f64)] {
        &self.terms
    }

    pub fn max_degree(&self) -> usize {
        self.terms.last().map_or(0, |&(d, _)| d)
    }

    /// Expected column weight `sum_D Omega_D D`.
    pub fn mean_degree(&self) -> f64 {
        self.terms.iter().map(|&(d, w)| d as f64 * w).sum()
    }

    pub fn check_against(&self, k_info: usize) -> Result<()> {
        match self.terms.iter().find(|&&(d, _)| d > k_info) {
            Some(&(degree, _)) => Err(Error::InvalidDegree { degree, k_info }),
            None => Ok(()),
        }
    }

    /// Draw a degree `D` with probability `Omega_D`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for &(d, w) in &self.terms {
            acc += w;
            if u < acc {
                return d;
            }
        }
        // Rounding in the cumulative sum can leave u just above the last edge.
        self.terms
            .iter()
            .rev()
            .find(|&&(_, w)| w > 0.0)
            .map_or(self.terms[0].0, |&(d, _)| d)
    }
}

/// Free-function form of [`DegreeDistribution::sample`].
pub fn sample_degree<R: Rng + ?Sized>(dist: &DegreeDistribution, rng: &mut R) -> usize {
    dist.sample(rng)
}

impl fmt::Display for DegreeDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let [(d, _)] = self.terms.as_slice() {
            return write!(f, "x^{d}");
        }
        for (i, (d, w)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            write!(f, "{w}x^{d}")?;
        }
        Ok(())
    }
}

/// Accepts `8`, `x^8`, or a mixture such as `0.5x^2+0.5x^4`.
impl FromStr for DegreeDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = Error::InvalidDistribution("cannot parse degree distribution");
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if let Ok(d) = compact.parse::<usize>() {
            return Self::regular(d);
        }
        let mut terms = Vec::new();
        for term in compact.split('+') {
            let (weight, degree) = term.split_once('x').ok_or(bad.clone())?;
            let weight = match weight.trim_end_matches('*') {
                "" => 1.0,
                w => w.parse::<f64>().map_err(|_| bad.clone())?,
            };
            let degree = match degree.strip_prefix('^') {
                Some(d) => d.parse::<usize>().map_err(|_| bad.clone())?,
                None if degree.is_empty() => 1,
                None => return Err(bad),
            };
            terms.push((degree, weight));
        }
        Self::new(terms)
    }
}

/// Parameters of an `[N, K, Omega]` code draw.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeSpec {
    pub k_info: usize,
    pub n_total: usize,
    pub dist: DegreeDistribution,
    pub seed: u64,
}

impl CodeSpec {
    pub fn new(k_info: usize, n_total: usize, dist: DegreeDistribution, seed: u64) -> Self {
        CodeSpec { k_info, n_total, dist, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_info == 0 {
            return Err(Error::InvalidShape("K must be positive"));
        }
        if self.n_total < self.k_info {
            return Err(Error::InvalidShape("N must be at least K"));
        }
        self.dist.check_against(self.k_info)
    }

    pub fn rate(&self) -> f64 {
        self.k_info as f64 / self.n_total as f64
    }
}

/// Systematic generator `[I | P]` stored as the sorted supports of `P`'s columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorMatrix {
    k_info: usize,
    n_total: usize,
    seed: u64,
    parity_columns: Vec<Vec<usize>>,
}

impl GeneratorMatrix {
    /// Assemble a generator from explicit parity supports. Supports are sorted
    /// and checked for range and repeats.
    pub fn from_parts(
        k_info: usize,
        n_total: usize,
        seed: u64,
        mut parity_columns: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if k_info == 0 || n_total < k_info {
            return Err(Error::InvalidShape("need 0 < K <= N"));
        }
        check_len(n_total - k_info, parity_columns.len())?;
        for col in &mut parity_columns {
            col.sort_unstable();
            if col.is_empty() {
                return Err(Error::InvalidDegree { degree: 0, k_info });
            }
            if col.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidShape("repeated index in parity column"));
            }
            if col.last().is_some_and(|&i| i >= k_info) {
                return Err(Error::InvalidShape("parity index out of range"));
            }
        }
        Ok(GeneratorMatrix { k_info, n_total, seed, parity_columns })
    }

    pub fn k_info(&self) -> usize {
        self.k_info
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn num_parity(&self) -> usize {
        self.parity_columns.len()
    }

    pub fn parity_columns(&self) -> &[Vec<usize>] {
        &self.parity_columns
    }

    pub fn rate(&self) -> f64 {
        self.k_info as f64 / self.n_total as f64
    }

    /// Fraction of ones in the parity block `P`.
    pub fn parity_duty(&self) -> f64 {
        if self.parity_columns.is_empty() {
            return 0.0;
        }
        let ones: usize = self.parity_columns.iter().map(Vec::len).sum();
        ones as f64 / (self.parity_columns.len() * self.k_info) as f64
    }

    pub fn encode(&self, pixels: &[u8]) -> Result<Vec<u8>> {
        encode(self, pixels)
    }
}

/// Draw a generator for `spec`. Each parity column gets a degree from the
/// distribution and a uniformly random support of that size.
pub fn build_generator(spec: &CodeSpec) -> Result<GeneratorMatrix> {
    spec.validate()?;
    let mut rng: SimRng = seeded(spec.seed);
    let k = spec.k_info;
    let parity_columns = (0..spec.n_total - k)
        .map(|_| {
            let d = spec.dist.sample(&mut rng);
            let mut col = rand::seq::index::sample(&mut rng, k, d).into_vec();
            col.sort_unstable();
            col
        })
        .collect();
    Ok(GeneratorMatrix { k_info: k, n_total: spec.n_total, seed: spec.seed, parity_columns })
}

pub(crate) fn check_binary(bits: &[u8]) -> Result<()> {
    if bits.iter().all(|&b| b <= 1) {
        Ok(())
    } else {
        Err(Error::InvalidParameter("bit vector must contain only 0 and 1"))
    }
}

/// Systematic encoding: the pixels followed by one XOR per parity column.
pub fn encode(g: &GeneratorMatrix, pixels: &[u8]) -> Result<Vec<u8>> {
    check_len(g.k_info, pixels.len())?;
    check_binary(pixels)?;
    let mut word = Vec::with_capacity(g.n_total);
    word.extend_from_slice(pixels);
    word.extend(
        g.parity_columns
            .iter()
            .map(|col| col.iter().fold(0u8, |acc, &i| acc ^ pixels[i])),
    );
    Ok(word)
}

/// Parity-check matrix `H = [P^T | I]`, one sorted support per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    n_total: usize,
    rows: Vec<Vec<usize>>,
}

impl ParityCheckMatrix {
    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    /// `word * H^T` over GF(2).
    pub fn syndrome(&self, word: &[u8]) -> Result<Vec<u8>> {
        check_len(self.n_total, word.len())?;
        Ok(self
            .rows
            .iter()
            .map(|row| row.iter().fold(0u8, |acc, &i| acc ^ (word[i] & 1)))
            .collect())
    }

    pub fn is_codeword(&self, word: &[u8]) -> Result<bool> {
        Ok(self.syndrome(word)?.iter().all(|&s| s == 0))
    }
}

pub fn derive_parity_check(g: &GeneratorMatrix) -> ParityCheckMatrix {
    let rows = g
        .parity_columns
        .iter()
        .enumerate()
        .map(|(j, col)| {
            let mut row = col.clone();
            row.push(g.k_info + j);
            row
        })
        .collect();
    ParityCheckMatrix { n_total: g.n_total, rows }
}
