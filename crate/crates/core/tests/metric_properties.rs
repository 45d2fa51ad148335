use ldpcgi_core::metrics::{ber, grayscale_stack, mse, normalize, psnr};
use ldpcgi_core::rng::seeded;
use ldpcgi_core::{FrameStack, GrayImage};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

fn triple(len: usize) -> impl Strategy<Value = (Vec<u8>, Vec<u8>, Vec<u8>)> {
    let v = || prop::collection::vec(0u8..=1, len);
    (v(), v(), v())
}

proptest! {
    #[test]
    fn ber_is_a_metric((a, b, c) in (1usize..64).prop_flat_map(triple)) {
        let ab = ber(&a, &b).unwrap();
        prop_assert_eq!(ab, ber(&b, &a).unwrap());
        prop_assert_eq!(ab == 0.0, a == b);
        prop_assert!(ab <= ber(&a, &c).unwrap() + ber(&c, &b).unwrap() + 1e-15);
    }

    #[test]
    fn stack_mean_is_mean_of_frame_means(
        frames in (1usize..10).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(0u8..=1, 12), n))
    ) {
        let mut stack = FrameStack::new(4, 3);
        for f in &frames {
            stack.push(f.clone()).unwrap();
        }
        let img = grayscale_stack(&stack).unwrap();
        let mean_img = img.values().iter().sum::<f64>() / 12.0;
        let mean_frames = frames
            .iter()
            .map(|f| f.iter().map(|&b| f64::from(b)).sum::<f64>() / 12.0)
            .sum::<f64>()
            / frames.len() as f64;
        prop_assert!((mean_img - mean_frames).abs() < 1e-12);
        let count = frames.len() as f64;
        prop_assert!(img.values().iter().all(|&v| (v * count - (v * count).round()).abs() < 1e-9));
    }

    #[test]
    fn normalize_maps_into_unit_interval(v in prop::collection::vec(-1e3f64..1e3, 1..50)) {
        let n = normalize(&v);
        prop_assert!(n.iter().all(|x| (0.0..=1.0).contains(x)));
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            prop_assert!(n.contains(&0.0) && n.contains(&1.0));
        } else {
            prop_assert!(n.iter().all(|&x| x == 0.0));
        }
    }
}

#[test]
fn bernoulli_frames_converge_to_reflectance() {
    let rho: Vec<f64> = (0..64).map(|i| i as f64 / 63.0).collect();
    let count = 4096;
    let mut rng = seeded(12);
    let mut stack = FrameStack::new(8, 8);
    for _ in 0..count {
        stack.push(rho.iter().map(|&p| u8::from(rng.random::<f64>() < p)).collect()).unwrap();
    }
    let img = grayscale_stack(&stack).unwrap();
    for (&v, &p) in img.values().iter().zip(&rho) {
        let tol = 3.0 * (p * (1.0 - p) / count as f64).sqrt();
        assert!((v - p).abs() <= tol.max(1e-12), "rho {p}: {v}");
    }
}

#[test]
fn psnr_falls_as_noise_grows() {
    let mut rng = seeded(3);
    let truth_vals: Vec<f64> = (0..4096).map(|_| rng.random::<f64>()).collect();
    let truth = GrayImage::new(64, 64, truth_vals.clone()).unwrap();
    assert_eq!(psnr(&truth, &truth).unwrap(), f64::INFINITY);
    let mut prev = f64::INFINITY;
    for sigma in [0.01, 0.03, 0.1, 0.3] {
        let noisy: Vec<f64> = truth_vals
            .iter()
            .map(|&v| {
                let z: f64 = StandardNormal.sample(&mut rng);
                (v + sigma * z).clamp(0.0, 1.0)
            })
            .collect();
        let p = psnr(&truth, &GrayImage::new(64, 64, noisy).unwrap()).unwrap();
        assert!(p < prev, "sigma {sigma}: {p} >= {prev}");
        prev = p;
    }
    let zeros = GrayImage::new(2, 2, vec![0.0; 4]).unwrap();
    let ones = GrayImage::new(2, 2, vec![1.0; 4]).unwrap();
    assert_eq!(mse(&zeros, &ones).unwrap(), 1.0);
    assert_eq!(psnr(&zeros, &ones).unwrap(), 0.0);
}
