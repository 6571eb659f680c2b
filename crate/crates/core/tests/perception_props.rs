mod common;

use common::{oracle_sobel_mean, random_image};
use moaoff_core::perception::{
    complexity_from_features, edge_density, gray_entropy, image_complexity, normalize,
    resolution_scale, sharpness, text_complexity, Calibration, GrayImage, ImageWeights,
    TextFeatures, TextParams,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn arb_image() -> impl Strategy<Value = GrayImage> {
    (1usize..=24, 1usize..=24, any::<u64>())
        .prop_map(|(h, w, seed)| random_image(&mut ChaCha8Rng::seed_from_u64(seed), h, w))
}

fn arb_calibration() -> impl Strategy<Value = Calibration> {
    (
        0.0..100.0f64,
        0.0..200.0f64,
        0.0..3000.0f64,
        0.0..6000.0f64,
        1e-9..1e-3f64,
    )
        .prop_map(|(g5, gspan, l5, lspan, eps)| {
            Calibration::new(g5, g5 + gspan, l5, l5 + lspan, eps).unwrap()
        })
}

fn arb_weights() -> impl Strategy<Value = ImageWeights> {
    (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64)
        .prop_filter("non-zero", |(a, b, c, d)| a + b + c + d > 1e-6)
        .prop_map(|(a, b, c, d)| ImageWeights::new(a, b, c, d).unwrap())
}

proptest! {
    #[test]
    fn components_stay_in_unit_interval(
        img in arb_image(),
        cal in arb_calibration(),
        w in arb_weights(),
        h0 in 1usize..2048,
        w0 in 1usize..2048,
    ) {
        let s = image_complexity(&img, &w, &cal, h0, w0);
        for v in [s.c_res, s.c_edge, s.c_ent, s.c_lap, s.total] {
            prop_assert!((0.0..=1.0).contains(&v), "{s:?}");
        }
    }

    #[test]
    fn scoring_is_bit_deterministic(img in arb_image(), cal in arb_calibration(), w in arb_weights()) {
        let a = image_complexity(&img, &w, &cal, 1024, 1024);
        let b = image_complexity(&img.clone(), &w, &cal, 1024, 1024);
        prop_assert_eq!(a.total.to_bits(), b.total.to_bits());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn resolution_monotone_in_pixel_count(
        (h1, w1, h2, w2) in (1usize..64, 1usize..64, 1usize..64, 1usize..64),
        h0 in 1usize..128,
        w0 in 1usize..128,
    ) {
        let a = GrayImage::filled(h1, w1, 0).unwrap();
        let b = GrayImage::filled(h2, w2, 0).unwrap();
        if h1 * w1 <= h2 * w2 {
            prop_assert!(resolution_scale(&a, h0, w0) <= resolution_scale(&b, h0, w0));
        }
    }

    #[test]
    fn entropy_ignores_pixel_order(img in arb_image(), seed in any::<u64>()) {
        let mut pixels = img.pixels().to_vec();
        pixels.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let shuffled = GrayImage::new(img.height(), img.width(), pixels).unwrap();
        prop_assert_eq!(gray_entropy(&img).to_bits(), gray_entropy(&shuffled).to_bits());
    }

    #[test]
    fn normalization_is_monotone(
        x in -1e4..1e4f64,
        dx in 0.0..1e4f64,
        p5 in -100.0..100.0f64,
        span in 0.0..1000.0f64,
        eps in 1e-9..1.0f64,
    ) {
        prop_assert!(normalize(x, p5, p5 + span, eps) <= normalize(x + dx, p5, p5 + span, eps));
    }

    #[test]
    fn edge_density_follows_raw_gradient(a in arb_image(), b in arb_image(), cal in arb_calibration()) {
        let (ga, gb) = (oracle_sobel_mean(&a), oracle_sobel_mean(&b));
        if ga <= gb {
            prop_assert!(edge_density(&a, &cal) <= edge_density(&b, &cal));
        }
        prop_assert!((0.0..=1.0).contains(&sharpness(&a, &cal)));
    }

    #[test]
    fn token_length_monotone(l in 0usize..5000, extra in 0usize..5000, l0 in 1u64..4096) {
        let params = TextParams::new(l0, 3.0, 0.5, 0.5).unwrap();
        let f = |n| TextFeatures { token_count: n, entity_count: 0, sentence_count: 1 };
        prop_assert!(complexity_from_features(&f(l), &params).c_l <= complexity_from_features(&f(l + extra), &params).c_l);
    }

    #[test]
    fn added_entity_never_lowers_ner(words in proptest::collection::vec("[a-z]{1,8}", 0..40), pos in any::<prop::sample::Index>()) {
        let params = TextParams::default();
        let base = words.join(" ");
        let mut with = words.clone();
        let at = if with.is_empty() { 0 } else { pos.index(with.len()) };
        with.insert(at, "2024".to_string());
        let before = text_complexity(&base, &params);
        let after = text_complexity(&with.join(" "), &params);
        prop_assert!(after.c_ner >= before.c_ner);
        prop_assert!((0.0..=1.0).contains(&after.total));
    }
}
