use ldpcgi_core::baselines::{pinv_residual, system_matrix};
use ldpcgi_core::rng::seeded;
use ldpcgi_core::{
    cgi_reconstruct, dgi_reconstruct, pinv_reconstruct, random_speckle, sense, ChannelParams, Fading,
    IlluminationEnsemble, Measurement, SceneImage,
};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn setup(k: usize, n: usize, seed: u64, fading: Fading) -> (IlluminationEnsemble, SceneImage, Measurement) {
    let ens = random_speckle(k, n, 0.3, seed).unwrap();
    let mut rng = seeded(seed ^ 0xabc);
    let bits: Vec<u8> = (0..k).map(|_| u8::from(rng.random::<bool>())).collect();
    let scene = SceneImage::from_bits(k, 1, &bits).unwrap();
    let m = sense(&ens, &scene, &ChannelParams::new(4.0, 1.0, fading).unwrap(), seed + 1).unwrap();
    (ens, scene, m)
}

fn argsort(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]).then(a.cmp(&b)));
    idx
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + y.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn permutation_equivariance(seed in any::<u64>(), k in 3usize..20, extra in 0usize..20) {
        let (ens, _, m) = setup(k, 2 * k + extra, seed, Fading::Rayleigh);
        let mut perm: Vec<usize> = (0..k).collect();
        perm.shuffle(&mut seeded(seed));
        let pens = ens.permuted(&perm).unwrap();
        type Recon = fn(&IlluminationEnsemble, &Measurement) -> ldpcgi_core::Result<ldpcgi_core::Reconstruction>;
        let methods: [Recon; 3] = [cgi_reconstruct, dgi_reconstruct, pinv_reconstruct];
        for f in methods {
            let a = f(&ens, &m).unwrap().image;
            let b = f(&pens, &m).unwrap().image;
            // Pixel i moves to perm[i].
            let moved: Vec<f64> = (0..k).map(|j| a[perm.iter().position(|&p| p == j).unwrap()]).collect();
            prop_assert!(close(&moved, &b, 1e-8));
        }
    }

    #[test]
    fn cgi_ranking_survives_positive_affine_maps(seed in any::<u64>(), scale in 0.01f64..100.0, shift in -50.0f64..50.0) {
        let (ens, _, m) = setup(16, 40, seed, Fading::None);
        let mut m2 = m.clone();
        m2.bucket.iter_mut().for_each(|r| *r = scale * *r + shift);
        let a = cgi_reconstruct(&ens, &m).unwrap().image;
        let b = cgi_reconstruct(&ens, &m2).unwrap().image;
        prop_assert!(close(&b, &a.iter().map(|v| scale * v).collect::<Vec<_>>(), 1e-9));
        prop_assert_eq!(argsort(&a), argsort(&b.iter().map(|v| v / scale).collect::<Vec<_>>()));
    }

    #[test]
    fn dgi_ranking_survives_positive_scaling(seed in any::<u64>(), scale in 0.01f64..100.0) {
        let (ens, _, m) = setup(16, 40, seed, Fading::None);
        let mut m2 = m.clone();
        m2.bucket.iter_mut().for_each(|r| *r *= scale);
        let a = dgi_reconstruct(&ens, &m).unwrap().image;
        let b = dgi_reconstruct(&ens, &m2).unwrap().image;
        prop_assert!(close(&b, &a.iter().map(|v| scale * v).collect::<Vec<_>>(), 1e-9));
    }
}

#[test]
fn pinv_beats_random_candidates() {
    for seed in 0..5 {
        let (ens, scene, m) = setup(24, 60, seed, Fading::Rayleigh);
        let x = pinv_reconstruct(&ens, &m).unwrap().image;
        let best = pinv_residual(&ens, &m, &x).unwrap();
        let mut rng = seeded(seed + 100);
        for c in 0..100 {
            let cand: Vec<f64> = if c % 2 == 0 {
                (0..24).map(|_| rng.random::<f64>()).collect()
            } else {
                // Perturbations of the truth and of the solution itself.
                let base = if c % 4 == 1 { scene.reflectance() } else { &x[..] };
                base.iter().map(|&v| v + 0.01 * (rng.random::<f64>() - 0.5)).collect()
            };
            assert!(best <= pinv_residual(&ens, &m, &cand).unwrap() + 1e-12);
        }
    }
}

#[test]
fn pinv_matches_full_svd_solution() {
    for (k, n) in [(20usize, 20usize), (30, 64), (40, 120)] {
        let (ens, _, m) = setup(k, n, k as u64, Fading::Rayleigh);
        let a = system_matrix(&ens, &m).unwrap();
        let b = DVector::from_column_slice(&m.bucket);
        let svd = a.svd(true, true);
        let eps = 1e-10 * svd.singular_values.max();
        let want = svd.solve(&b, eps).unwrap();
        let got = pinv_reconstruct(&ens, &m).unwrap().image;
        assert!(close(&got, want.as_slice(), 1e-8), "K={k} N={n}");
    }
}

#[test]
fn pinv_minimum_norm_on_duplicated_patterns() {
    // Only the sum of pixels 0 and 1 is observed; the minimum-norm split is even.
    let ens = IlluminationEnsemble::new(
        3,
        vec![vec![0, 1], vec![0, 1], vec![2]],
        ldpcgi_core::PatternSource::Speckle,
    )
    .unwrap();
    let ch = ChannelParams::new(1.0, 0.0, Fading::None).unwrap();
    let m = Measurement::new(vec![1.0, 1.0, 1.0], vec![1.0; 3], ch, 0).unwrap();
    let x = pinv_reconstruct(&ens, &m).unwrap().image;
    assert!(close(&x, &[0.5, 0.5, 1.0], 1e-10), "{x:?}");
}
