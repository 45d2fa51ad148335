//! Closed-form lower bound on the pixel error rate of the coded system.
//!
//! The bound adds a Rayleigh-fading term to a decoding term. The decoding
//! term averages a pairwise AWGN error probability over the number `j` of
//! parity symbols hit by a single pixel error, which is binomial with the
//! per-column hit probability `aleph1`:
//!
//! ```text
//! P_b = 1/2 [ (1 - sqrt(g / (1 + g)))
//!           + sum_j C(N-K, j) a^j (1 - a)^(N-K-j) erfc(sqrt(E(j) / (R_c N_0))) ]
//! ```
//!
//! with `g = E_s / N_0`. Binomial weights are evaluated in the log domain.

use alloc::vec::Vec;

use crate::code::DegreeDistribution;
use crate::error::{Error, Result};

/// How the aggregate energy of the symbols involved in a weight-one error
/// event scales with the number `j` of affected parity symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnergyRule {
    /// The erroneous pixel plus `j` parity symbols: `(1 + j) E_s`.
    #[default]
    PixelPlusParity,
    /// Parity symbols only: `j E_s`.
    ParityOnly,
}

impl EnergyRule {
    fn symbols(self, j: usize) -> f64 {
        match self {
            EnergyRule::PixelPlusParity => (1 + j) as f64,
            EnergyRule::ParityOnly => j as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundParams {
    pub k_info: usize,
    pub n_total: usize,
    pub dist: DegreeDistribution,
    pub es: f64,
    pub n0: f64,
    pub energy_rule: EnergyRule,
}

impl BoundParams {
    pub fn new(k_info: usize, n_total: usize, dist: DegreeDistribution, es: f64, n0: f64) -> Result<Self> {
        let p = BoundParams { k_info, n_total, dist, es, n0, energy_rule: EnergyRule::default() };
        p.validate()?;
        Ok(p)
    }

    /// Unit `N_0` and `E_s` from an SNR in dB.
    pub fn from_snr_db(k_info: usize, n_total: usize, dist: DegreeDistribution, snr_db: f64) -> Result<Self> {
        Self::new(k_info, n_total, dist, crate::forward::snr_db_to_linear(snr_db), 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_info == 0 || self.n_total <= self.k_info {
            return Err(Error::InvalidShape("bound needs 1 <= K < N"));
        }
        if !(self.es > 0.0 && self.n0 > 0.0) {
            return Err(Error::InvalidParameter("bound needs E_s > 0 and N_0 > 0"));
        }
        self.dist.check_against(self.k_info)
    }

    pub fn gamma(&self) -> f64 {
        self.es / self.n0
    }

    pub fn rate(&self) -> f64 {
        self.k_info as f64 / self.n_total as f64
    }
}

/// BER of a coherent binary symbol under Rayleigh fading: `(1 - sqrt(g/(1+g)))/2`.
pub fn rayleigh_ber(gamma: f64) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(Error::InvalidParameter("gamma must be non-negative"));
    }
    if gamma.is_infinite() {
        return Ok(0.0);
    }
    // 1 - sqrt(g/(1+g)) = 1 / ((1+g) (1 + sqrt(g/(1+g)))) avoids cancellation.
    let s = libm::sqrt(gamma / (1.0 + gamma));
    Ok(0.5 / ((1.0 + gamma) * (1.0 + s)))
}

/// Probability that a weight-`w` column over `K` rows covers a fixed row:
/// `C(K-1, w-1) / C(K, w) = w / K`.
pub fn upsilon1(k: usize, w: usize) -> Result<f64> {
    if w == 0 || w > k {
        return Err(Error::InvalidDegree { degree: w, k_info: k });
    }
    Ok(w as f64 / k as f64)
}

/// Hit probability averaged over the degree distribution.
pub fn aleph1(dist: &DegreeDistribution, k: usize) -> Result<f64> {
    dist.terms()
        .iter()
        .try_fold(0.0, |acc, &(d, w)| Ok(acc + w * upsilon1(k, d)?))
}

/// `erfc(x)`, via the rational approximations of the fdlibm family (`libm`).
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Pairwise term `erfc(sqrt(E(j) / (R_c N_0))) / 2`.
pub fn pairwise_error(j: usize, params: &BoundParams) -> Result<f64> {
    params.validate()?;
    if j > params.n_total - params.k_info {
        return Err(Error::InvalidParameter("j exceeds the number of parity symbols"));
    }
    Ok(0.5 * pairwise_erfc(j, params))
}

fn pairwise_erfc(j: usize, params: &BoundParams) -> f64 {
    let energy = params.energy_rule.symbols(j) * params.es;
    erfc(libm::sqrt(energy / (params.rate() * params.n0)))
}

fn ln_choose(n: usize, j: usize) -> f64 {
    let (n, j) = (n as f64, j as f64);
    libm::lgamma(n + 1.0) - libm::lgamma(j + 1.0) - libm::lgamma(n - j + 1.0)
}

/// `C(m, j) a^j (1 - a)^(m - j)` for `j = 0..=m`, in the log domain.
pub fn binomial_weights(m: usize, a: f64) -> Vec<f64> {
    (0..=m)
        .map(|j| {
            if a <= 0.0 {
                return if j == 0 { 1.0 } else { 0.0 };
            }
            if a >= 1.0 {
                return if j == m { 1.0 } else { 0.0 };
            }
            let ln = ln_choose(m, j) + j as f64 * libm::log(a) + (m - j) as f64 * libm::log1p(-a);
            libm::exp(ln)
        })
        .collect()
}

/// The two summands of the bound, each already carrying the global `1/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundTerms {
    pub gamma: f64,
    /// `(1 - sqrt(g/(1+g))) / 2`.
    pub p_ray: f64,
    /// `(1/2) sum_j w_j erfc(...)`.
    pub p_e: f64,
    /// `p_ray + p_e`.
    pub p_b: f64,
}

pub fn bound_terms(params: &BoundParams) -> Result<BoundTerms> {
    params.validate()?;
    let gamma = params.gamma();
    let p_ray = rayleigh_ber(gamma)?;
    let a = aleph1(&params.dist, params.k_info)?;
    let m = params.n_total - params.k_info;
    let weights = binomial_weights(m, a);
    let sum: f64 = weights
        .iter()
        .enumerate()
        .filter(|&(_, &w)| w > 0.0)
        .map(|(j, &w)| w * pairwise_erfc(j, params))
        .sum();
    let p_e = 0.5 * sum;
    Ok(BoundTerms { gamma, p_ray, p_e, p_b: (p_ray + p_e).clamp(0.0, 1.0) })
}

pub fn ber_lower_bound(params: &BoundParams) -> Result<f64> {
    Ok(bound_terms(params)?.p_b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn reg(d: usize) -> DegreeDistribution {
        DegreeDistribution::regular(d).unwrap()
    }

    #[test]
    fn rayleigh_values() {
        assert_eq!(rayleigh_ber(0.0).unwrap(), 0.5);
        let direct = 0.5 * (1.0 - libm::sqrt(0.5));
        assert!((rayleigh_ber(1.0).unwrap() - direct).abs() < 1e-15);
        assert!((rayleigh_ber(1.0).unwrap() - 0.146_447).abs() < 1e-6);
        let v = rayleigh_ber(100.0).unwrap();
        assert!((v - 0.0025).abs() / 0.0025 < 0.05);
        assert!(rayleigh_ber(-1.0).is_err());
    }

    #[test]
    fn upsilon_values() {
        assert_eq!(upsilon1(37, 37).unwrap(), 1.0);
        assert_eq!(upsilon1(1024, 8).unwrap(), 0.0078125);
        assert!(upsilon1(8, 0).is_err());
        assert!(upsilon1(8, 9).is_err());
    }

    #[test]
    fn aleph_values() {
        assert_eq!(aleph1(&reg(1), 50).unwrap(), 1.0 / 50.0);
        assert_eq!(aleph1(&reg(8), 1024).unwrap(), 0.0078125);
        let mix = DegreeDistribution::new(vec![(2, 0.5), (4, 0.5)]).unwrap();
        assert!((aleph1(&mix, 8).unwrap() - 0.375).abs() < 1e-15);
        assert!(aleph1(&reg(9), 8).is_err());
    }

    #[test]
    fn pairwise_values() {
        let p = BoundParams::new(4, 8, reg(2), 1.0, 1.0).unwrap();
        // erfc(sqrt(2)) / 2 from tables.
        assert!((pairwise_error(0, &p).unwrap() - 0.022_750_131_948_179).abs() < 1e-12);
        let mut last = 1.0;
        for j in 0..=4 {
            let v = pairwise_error(j, &p).unwrap();
            assert!(v < last);
            last = v;
        }
        assert!(pairwise_error(5, &p).is_err());
        let loud = BoundParams::new(4, 8, reg(2), 1e6, 1.0).unwrap();
        assert!(pairwise_error(0, &loud).unwrap() < 1e-300);
    }

    #[test]
    fn parity_only_rule_shifts_energy() {
        let mut p = BoundParams::new(4, 8, reg(2), 1.0, 1.0).unwrap();
        p.energy_rule = EnergyRule::ParityOnly;
        assert_eq!(pairwise_error(0, &p).unwrap(), 0.5);
    }

    #[test]
    fn weights_sum_to_one() {
        let a = aleph1(&reg(128), 1024).unwrap();
        let s: f64 = binomial_weights(1024, a).iter().sum();
        assert!((s - 1.0).abs() < 1e-9);
        assert_eq!(binomial_weights(3, 1.0), vec![0.0, 0.0, 0.0, 1.0]);
        assert_eq!(binomial_weights(3, 0.0), vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn full_weight_columns() {
        let p = BoundParams::new(4, 6, reg(4), 1.0, 1.0).unwrap();
        let t = bound_terms(&p).unwrap();
        let expect = 0.5 * erfc(libm::sqrt(3.0 / (4.0 / 6.0)));
        assert!((t.p_e - expect).abs() < 1e-15);
    }

    #[test]
    fn decomposition_and_range() {
        for snr in -5..=20 {
            let p = BoundParams::from_snr_db(256, 512, reg(8), snr as f64).unwrap();
            let t = bound_terms(&p).unwrap();
            assert_eq!(t.p_b, t.p_ray + t.p_e);
            assert!(t.p_b >= t.p_ray);
            assert!((0.0..=1.0).contains(&t.p_b));
        }
    }

    #[test]
    fn invalid_params() {
        assert!(BoundParams::new(4, 4, reg(1), 1.0, 1.0).is_err());
        assert!(BoundParams::new(4, 8, reg(1), 1.0, 0.0).is_err());
        assert!(BoundParams::new(4, 8, reg(5), 1.0, 1.0).is_err());
    }
}
