//! Brute-force reference kernels and seeded image generation.

#![allow(dead_code)]

use moaoff_core::perception::GrayImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SOBEL_X: [[f64; 3]; 3] = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
const SOBEL_Y: [[f64; 3]; 3] = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]];
const LAPLACE: [[f64; 3]; 3] = [[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]];

fn convolve_at(img: &GrayImage, kernel: &[[f64; 3]; 3], r: usize, c: usize) -> f64 {
    let w = img.width();
    let mut acc = 0.0;
    for (i, row) in kernel.iter().enumerate() {
        for (j, k) in row.iter().enumerate() {
            acc += k * f64::from(img.pixels()[(r + i - 1) * w + (c + j - 1)]);
        }
    }
    acc
}

fn interior(img: &GrayImage) -> Vec<(usize, usize)> {
    if img.height() < 3 || img.width() < 3 {
        return Vec::new();
    }
    (1..img.height() - 1)
        .flat_map(|r| (1..img.width() - 1).map(move |c| (r, c)))
        .collect()
}

pub fn oracle_sobel_mean(img: &GrayImage) -> f64 {
    let cells = interior(img);
    if cells.is_empty() {
        return 0.0;
    }
    let mut sum = 0.0;
    for &(r, c) in &cells {
        let gx = convolve_at(img, &SOBEL_X, r, c);
        let gy = convolve_at(img, &SOBEL_Y, r, c);
        sum += (gx * gx + gy * gy).sqrt();
    }
    sum / cells.len() as f64
}

pub fn oracle_laplacian_variance(img: &GrayImage) -> f64 {
    let responses: Vec<f64> = interior(img)
        .into_iter()
        .map(|(r, c)| convolve_at(img, &LAPLACE, r, c))
        .collect();
    if responses.is_empty() {
        return 0.0;
    }
    let n = responses.len() as f64;
    let mean = responses.iter().sum::<f64>() / n;
    responses.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n
}

pub fn random_image(rng: &mut ChaCha8Rng, height: usize, width: usize) -> GrayImage {
    let pixels = (0..height * width).map(|_| rng.random::<u8>()).collect();
    GrayImage::new(height, width, pixels).unwrap()
}

pub fn seeded_image(seed: u64, height: usize, width: usize) -> GrayImage {
    random_image(&mut ChaCha8Rng::seed_from_u64(seed), height, width)
}

/// `|a - b| / max(|b|, 1)`, so values near zero compare absolutely.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// 200 images with shapes in 1..=16 × 1..=16, drawn from one seeded stream.
pub fn oracle_corpus(seed: u64) -> Vec<GrayImage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..200)
        .map(|_| {
            let h = rng.random_range(1..=16);
            let w = rng.random_range(1..=16);
            random_image(&mut rng, h, w)
        })
        .collect()
}
