//! Classical ghost-imaging reconstructions used as comparison points.
//!
//! CGI and DGI are the usual ensemble correlators and work on the raw bucket
//! values. PINV folds the receiver's fading gains and `sqrt(E_s)` into the
//! system matrix and returns the minimum-norm least-squares solution.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};
use crate::forward::{IlluminationEnsemble, Measurement};

/// Singular values below `PINV_RCOND * sigma_max` are dropped.
pub const PINV_RCOND: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Cgi,
    Dgi,
    Pinv,
    Ldpc,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Cgi => "cgi",
            Method::Dgi => "dgi",
            Method::Pinv => "pinv",
            Method::Ldpc => "ldpc",
        }
    }
}

/// Unnormalized real-valued image produced by a reconstruction method.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub image: Vec<f64>,
    pub method: Method,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// `(1/N) sum_n (y_n - mean y) A_{n,i}`, which equals the covariance with
/// the centred patterns because the centring term of `A` cancels.
fn correlate(ens: &IlluminationEnsemble, y: &[f64]) -> Vec<f64> {
    let n = y.len() as f64;
    let ybar = mean(y);
    let mut image = vec![0.0; ens.k_pixels()];
    for (p, &v) in ens.patterns().iter().zip(y) {
        for &i in p {
            image[i] += v - ybar;
        }
    }
    image.iter_mut().for_each(|v| *v /= n);
    image
}

fn check_inputs(ens: &IlluminationEnsemble, m: &Measurement) -> Result<()> {
    if m.is_empty() {
        return Err(Error::InvalidShape("no measurements"));
    }
    check_len(ens.len(), m.len())
}

/// Correlation estimator `(1/N) sum_n (R_n - mean R)(A_{n,i} - mean A_i)`.
pub fn cgi_reconstruct(ens: &IlluminationEnsemble, m: &Measurement) -> Result<Reconstruction> {
    check_inputs(ens, m)?;
    Ok(Reconstruction { image: correlate(ens, &m.bucket), method: Method::Cgi })
}

/// Differential estimator: the bucket is first corrected by the pattern's
/// total intensity `S_n` scaled by `mean R / mean S`.
pub fn dgi_reconstruct(ens: &IlluminationEnsemble, m: &Measurement) -> Result<Reconstruction> {
    check_inputs(ens, m)?;
    let totals: Vec<f64> = ens.patterns().iter().map(|p| p.len() as f64).collect();
    let sbar = mean(&totals);
    if sbar == 0.0 {
        return Err(Error::InvalidParameter("mean pattern intensity is zero"));
    }
    let ratio = mean(&m.bucket) / sbar;
    let corrected: Vec<f64> = m
        .bucket
        .iter()
        .zip(&totals)
        .map(|(&r, &s)| r - ratio * s)
        .collect();
    Ok(Reconstruction { image: correlate(ens, &corrected), method: Method::Dgi })
}

/// System matrix `diag(g sqrt(E_s)) A` with the receiver's gains `g`.
pub fn system_matrix(ens: &IlluminationEnsemble, m: &Measurement) -> Result<DMatrix<f64>> {
    check_len(ens.len(), m.len())?;
    let sq = libm::sqrt(m.channel.es);
    let gains = m.receiver_gains();
    let mut a = DMatrix::zeros(ens.len(), ens.k_pixels());
    for (row, p) in ens.patterns().iter().enumerate() {
        for &i in p {
            a[(row, i)] = gains[row] * sq;
        }
    }
    Ok(a)
}

/// Minimum-norm least squares with singular values below
/// `PINV_RCOND * sigma_max` dropped.
///
/// A tall system is first reduced by Householder QR. When the extreme
/// singular values of `R` (estimated by power and inverse iteration) show no
/// value under the cutoff, the triangular solve is the exact answer; otherwise
/// the truncated SVD of the full system is used.
pub fn pinv_reconstruct(ens: &IlluminationEnsemble, m: &Measurement) -> Result<Reconstruction> {
    check_inputs(ens, m)?;
    let a = system_matrix(ens, m)?;
    let b = DVector::from_column_slice(&m.bucket);
    let x = match qr_solve(&a, &b) {
        Some(x) => x,
        None => svd_solve(a, &b)?,
    };
    Ok(Reconstruction { image: x.iter().copied().collect(), method: Method::Pinv })
}

fn svd_solve(a: DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let k = a.ncols();
    let svd = a.svd(true, true);
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if sigma_max == 0.0 {
        return Ok(DVector::zeros(k));
    }
    svd.solve(b, PINV_RCOND * sigma_max)
        .map_err(|_| Error::InvalidShape("SVD solve failed"))
}

const SPECTRAL_ITERS: usize = 12;

/// Least squares through QR when `R` is well conditioned; `None` otherwise.
fn qr_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let (n, k) = a.shape();
    if n < k {
        return None;
    }
    let qr = a.clone().qr();
    let r = qr.r();
    if r.diagonal().iter().any(|&d| d == 0.0 || !d.is_finite()) {
        return None;
    }
    let start = DVector::from_fn(k, |i, _| 1.0 + (i % 7) as f64 / 7.0);

    let mut v = start.normalize();
    let mut sigma_max2 = 0.0;
    for _ in 0..SPECTRAL_ITERS {
        let w = r.tr_mul(&(&r * &v));
        sigma_max2 = w.norm();
        if sigma_max2 == 0.0 {
            return None;
        }
        v = w / sigma_max2;
    }

    // Inverse iteration on R^T R; the estimate never undershoots sigma_min.
    let mut v = start.normalize();
    let mut sigma_min2 = f64::INFINITY;
    for _ in 0..SPECTRAL_ITERS {
        let y = r.tr_solve_upper_triangular(&v)?;
        let w = r.solve_upper_triangular(&y)?;
        let norm = w.norm();
        if !norm.is_finite() || norm == 0.0 {
            return None;
        }
        sigma_min2 = 1.0 / norm;
        v = w / norm;
    }
    if libm::sqrt(sigma_min2) < 10.0 * PINV_RCOND * libm::sqrt(sigma_max2) {
        return None;
    }

    let mut qtb = b.clone();
    qr.q_tr_mul(&mut qtb);
    r.solve_upper_triangular(&qtb.rows(0, k).into_owned())
}

/// `||R - A x||` for the PINV system matrix.
pub fn pinv_residual(ens: &IlluminationEnsemble, m: &Measurement, x: &[f64]) -> Result<f64> {
    check_len(ens.k_pixels(), x.len())?;
    let a = system_matrix(ens, m)?;
    let r = DVector::from_column_slice(&m.bucket) - a * DVector::from_column_slice(x);
    Ok(r.norm())
}

/// Two-class Otsu threshold over the exact sorted values.
///
/// Returns the midpoint of the split maximising the between-class variance;
/// `None` when all values are equal.
pub fn otsu_threshold(values: &[f64]) -> Option<f64> {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n < 2 || sorted[0] == sorted[n - 1] {
        return None;
    }
    let total: f64 = sorted.iter().sum();
    let mut best = (f64::NEG_INFINITY, 0.0);
    let mut low_sum = 0.0;
    for split in 1..n {
        low_sum += sorted[split - 1];
        if sorted[split - 1] == sorted[split] {
            continue;
        }
        let w0 = split as f64;
        let w1 = (n - split) as f64;
        let mu0 = low_sum / w0;
        let mu1 = (total - low_sum) / w1;
        let between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if between > best.0 {
            best = (between, 0.5 * (sorted[split - 1] + sorted[split]));
        }
    }
    Some(best.1)
}

/// Pixels above the Otsu threshold become one; a constant image is all zeros.
pub fn binarize(values: &[f64]) -> Vec<u8> {
    match otsu_threshold(values) {
        Some(t) => values.iter().map(|&v| u8::from(v > t)).collect(),
        None => vec![0; values.len()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{sense, ChannelParams, Fading, PatternSource, SceneImage};

    fn identity(k: usize) -> IlluminationEnsemble {
        IlluminationEnsemble::new(k, (0..k).map(|i| vec![i]).collect(), PatternSource::Coded).unwrap()
    }

    fn noiseless(es: f64) -> ChannelParams {
        ChannelParams::new(es, 0.0, Fading::None).unwrap()
    }

    fn meas(bucket: Vec<f64>) -> Measurement {
        let n = bucket.len();
        Measurement::new(bucket, vec![1.0; n], noiseless(1.0), 0).unwrap()
    }

    fn ranking(v: &[f64]) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]).then(a.cmp(&b)));
        idx
    }

    #[test]
    fn constant_bucket_gives_zero_cgi() {
        let ens = IlluminationEnsemble::new(3, vec![vec![0, 1], vec![2], vec![0, 2]], PatternSource::Speckle).unwrap();
        let rec = cgi_reconstruct(&ens, &meas(vec![4.0; 3])).unwrap();
        assert!(rec.image.iter().all(|&v| v.abs() < 1e-15));
    }

    #[test]
    fn cgi_identity_oracle() {
        // Closed form on the identity ensemble: (1/K)(delta_i - mean delta).
        let delta = [1.0, 0.0, 1.0, 0.0];
        let ens = identity(4);
        let m = sense(&ens, &SceneImage::new(2, 2, delta.to_vec()).unwrap(), &noiseless(1.0), 0).unwrap();
        let rec = cgi_reconstruct(&ens, &m).unwrap();
        for (v, d) in rec.image.iter().zip(delta) {
            assert!((v - (d - 0.5) / 4.0).abs() < 1e-15);
        }
        let m4 = sense(&ens, &SceneImage::new(2, 2, delta.to_vec()).unwrap(), &noiseless(4.0), 0).unwrap();
        let rec4 = cgi_reconstruct(&ens, &m4).unwrap();
        for i in 0..4 {
            assert!((rec4.image[i] - 2.0 * rec.image[i]).abs() < 1e-15);
        }
        assert_eq!(ranking(&rec.image), ranking(&rec4.image));
    }

    #[test]
    fn proportional_bucket_gives_zero_dgi() {
        let ens = IlluminationEnsemble::new(3, vec![vec![0, 1], vec![2], vec![0, 1, 2]], PatternSource::Speckle).unwrap();
        let rec = dgi_reconstruct(&ens, &meas(vec![2.0 * 2.5, 2.5, 3.0 * 2.5])).unwrap();
        assert!(rec.image.iter().all(|&v| v.abs() < 1e-14));
    }

    #[test]
    fn dgi_identity_ranking_and_cgi_agreement() {
        let delta = [0.0, 1.0, 1.0, 0.0];
        let ens = identity(4);
        let m = sense(&ens, &SceneImage::new(2, 2, delta.to_vec()).unwrap(), &noiseless(1.0), 0).unwrap();
        let dgi = dgi_reconstruct(&ens, &m).unwrap();
        let cgi = cgi_reconstruct(&ens, &m).unwrap();
        let top: Vec<usize> = ranking(&dgi.image)[2..].to_vec();
        assert_eq!(top, vec![1, 2]);
        // Equal pattern totals make the differential correction a constant shift.
        for i in 0..4 {
            assert!((dgi.image[i] - cgi.image[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn dgi_rejects_empty_patterns() {
        let ens = IlluminationEnsemble::new(2, vec![vec![], vec![]], PatternSource::Speckle).unwrap();
        assert!(dgi_reconstruct(&ens, &meas(vec![0.0, 0.0])).is_err());
    }

    #[test]
    fn pinv_square_and_tall() {
        let delta = vec![1.0, 0.0, 1.0, 1.0];
        let scene = SceneImage::new(2, 2, delta.clone()).unwrap();
        let square = IlluminationEnsemble::new(
            4,
            vec![vec![0], vec![0, 1], vec![1, 2], vec![2, 3]],
            PatternSource::Coded,
        )
        .unwrap();
        let m = sense(&square, &scene, &noiseless(2.0), 0).unwrap();
        let rec = pinv_reconstruct(&square, &m).unwrap();
        assert!(pinv_residual(&square, &m, &rec.image).unwrap() < 1e-9);
        for (x, d) in rec.image.iter().zip(&delta) {
            assert!((x - d).abs() < 1e-9);
        }
        let tall = IlluminationEnsemble::new(
            4,
            vec![vec![0], vec![1], vec![2], vec![3], vec![0, 1], vec![1, 3], vec![0, 2, 3], vec![2]],
            PatternSource::Coded,
        )
        .unwrap();
        let m = sense(&tall, &scene, &noiseless(2.0), 0).unwrap();
        let rec = pinv_reconstruct(&tall, &m).unwrap();
        for (x, d) in rec.image.iter().zip(&delta) {
            assert!((x - d).abs() < 1e-9);
        }
    }

    #[test]
    fn pinv_rank_deficient_matches_normal_equations() {
        // Duplicate patterns leave pixel 2 unobserved and rank 2.
        let ens = IlluminationEnsemble::new(3, vec![vec![0, 1], vec![0, 1], vec![1]], PatternSource::Coded).unwrap();
        let m = meas(vec![1.0, 1.2, 0.4]);
        let rec = pinv_reconstruct(&ens, &m).unwrap();
        // Oracle: pixel 2 is in the null space, so the minimum-norm answer
        // sets it to zero and solves the 2x2 normal equations on pixels 0, 1.
        // A^T A = [[2, 2], [2, 3]], A^T b = [2.2, 2.6].
        let det = 2.0 * 3.0 - 2.0 * 2.0;
        let x0 = (3.0 * 2.2 - 2.0 * 2.6) / det;
        let x1 = (2.0 * 2.6 - 2.0 * 2.2) / det;
        assert!((rec.image[0] - x0).abs() < 1e-12);
        assert!((rec.image[1] - x1).abs() < 1e-12);
        assert!(rec.image[2].abs() < 1e-12);
    }

    #[test]
    fn otsu_splits_two_clusters() {
        let v = [0.1, 0.15, 0.9, 0.05, 1.0, 0.95];
        let t = otsu_threshold(&v).unwrap();
        assert!(t > 0.15 && t < 0.9);
        assert_eq!(binarize(&v), vec![0, 0, 1, 0, 1, 1]);
        assert_eq!(binarize(&[3.0; 4]), vec![0; 4]);
    }
}
