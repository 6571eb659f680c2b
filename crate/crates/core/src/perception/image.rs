use serde::{Deserialize, Serialize};

use super::calibration::{normalize, Calibration};
use crate::error::{Error, Result};

/// An 8-bit luminance image stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    height: usize,
    width: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(height: usize, width: usize, pixels: Vec<u8>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::domain(format!(
                "image dimensions must be positive, got {height}x{width}"
            )));
        }
        let expected = height
            .checked_mul(width)
            .ok_or_else(|| Error::domain("image dimensions overflow"))?;
        if pixels.len() != expected {
            return Err(Error::domain(format!(
                "{height}x{width} image needs {expected} pixels, got {}",
                pixels.len()
            )));
        }
        Ok(Self {
            height,
            width,
            pixels,
        })
    }

    pub fn filled(height: usize, width: usize, value: u8) -> Result<Self> {
        Self::new(height, width, vec![value; height.saturating_mul(width)])
    }

    pub fn from_fn(height: usize, width: usize, f: impl Fn(usize, usize) -> u8) -> Result<Self> {
        let mut pixels = Vec::with_capacity(height.saturating_mul(width));
        for r in 0..height {
            for c in 0..width {
                pixels.push(f(r, c));
            }
        }
        Self::new(height, width, pixels)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixel_count(&self) -> usize {
        self.pixels.len()
    }

    #[inline]
    fn at(&self, r: usize, c: usize) -> i32 {
        i32::from(self.pixels[r * self.width + c])
    }

    /// Applies `f` to the 3x3 neighbourhood of every interior pixel, in
    /// row-major order. The 1-pixel border is skipped.
    fn for_each_interior(&self, mut f: impl FnMut([[i32; 3]; 3])) {
        if self.height < 3 || self.width < 3 {
            return;
        }
        for r in 1..self.height - 1 {
            for c in 1..self.width - 1 {
                let mut win = [[0i32; 3]; 3];
                for (i, row) in win.iter_mut().enumerate() {
                    for (j, v) in row.iter_mut().enumerate() {
                        *v = self.at(r + i - 1, c + j - 1);
                    }
                }
                f(win);
            }
        }
    }
}

/// Non-negative weights of the four image indicators, normalized to sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageWeights {
    pub res: f64,
    pub edge: f64,
    pub ent: f64,
    pub lap: f64,
}

impl ImageWeights {
    /// Builds weights from raw non-negative values, rescaling them to sum to 1.
    pub fn new(res: f64, edge: f64, ent: f64, lap: f64) -> Result<Self> {
        let raw = [res, edge, ent, lap];
        if raw.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::domain(format!(
                "image weights must be finite and non-negative, got {raw:?}"
            )));
        }
        let sum: f64 = raw.iter().sum();
        if sum <= 0.0 {
            return Err(Error::domain("image weights must not all be zero"));
        }
        Ok(Self {
            res: res / sum,
            edge: edge / sum,
            ent: ent / sum,
            lap: lap / sum,
        })
    }

    pub fn uniform() -> Self {
        Self {
            res: 0.25,
            edge: 0.25,
            ent: 0.25,
            lap: 0.25,
        }
    }
}

impl Default for ImageWeights {
    fn default() -> Self {
        Self::uniform()
    }
}

/// Component breakdown of an image complexity score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImageComplexity {
    pub c_res: f64,
    pub c_edge: f64,
    pub c_ent: f64,
    pub c_lap: f64,
    pub total: f64,
}

pub fn resolution_scale(img: &GrayImage, ref_height: usize, ref_width: usize) -> f64 {
    let reference = (ref_height as f64) * (ref_width as f64);
    (img.pixel_count() as f64 / reference).min(1.0)
}

/// Mean Sobel gradient magnitude over interior pixels; 0 for images smaller
/// than 3x3.
pub fn mean_sobel_gradient(img: &GrayImage) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    img.for_each_interior(|w| {
        let gx = (w[0][2] + 2 * w[1][2] + w[2][2]) - (w[0][0] + 2 * w[1][0] + w[2][0]);
        let gy = (w[2][0] + 2 * w[2][1] + w[2][2]) - (w[0][0] + 2 * w[0][1] + w[0][2]);
        sum += f64::from(gx * gx + gy * gy).sqrt();
        count += 1;
    });
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

pub fn edge_density(img: &GrayImage, cal: &Calibration) -> f64 {
    normalize(
        mean_sobel_gradient(img),
        cal.grad_p5,
        cal.grad_p95,
        cal.epsilon,
    )
}

/// Shannon entropy of the gray-level histogram divided by `ln 256`.
pub fn gray_entropy(img: &GrayImage) -> f64 {
    let mut hist = [0u64; 256];
    for &p in img.pixels() {
        hist[usize::from(p)] += 1;
    }
    let n = img.pixel_count() as f64;
    let h: f64 = hist
        .iter()
        .filter(|&&k| k > 0)
        .map(|&k| {
            let k = k as f64;
            (k / n) * (n / k).ln()
        })
        .sum();
    (h / 256f64.ln()).clamp(0.0, 1.0)
}

/// Population variance of the 4-neighbour Laplacian over interior pixels.
pub fn laplacian_variance(img: &GrayImage) -> f64 {
    let mut responses = Vec::new();
    img.for_each_interior(|w| {
        responses.push(f64::from(
            w[0][1] + w[1][0] + w[1][2] + w[2][1] - 4 * w[1][1],
        ));
    });
    if responses.is_empty() {
        return 0.0;
    }
    let n = responses.len() as f64;
    let mean = responses.iter().sum::<f64>() / n;
    responses.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n
}

pub fn sharpness(img: &GrayImage, cal: &Calibration) -> f64 {
    normalize(
        laplacian_variance(img),
        cal.lap_p5,
        cal.lap_p95,
        cal.epsilon,
    )
}

pub fn image_complexity(
    img: &GrayImage,
    weights: &ImageWeights,
    cal: &Calibration,
    ref_height: usize,
    ref_width: usize,
) -> ImageComplexity {
    let c_res = resolution_scale(img, ref_height, ref_width);
    let c_edge = edge_density(img, cal);
    let c_ent = gray_entropy(img);
    let c_lap = sharpness(img, cal);
    let total =
        weights.res * c_res + weights.edge * c_edge + weights.ent * c_ent + weights.lap * c_lap;
    ImageComplexity {
        c_res,
        c_edge,
        c_ent,
        c_lap,
        total: total.clamp(0.0, 1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_levels() -> GrayImage {
        GrayImage::from_fn(16, 16, |r, c| (r * 16 + c) as u8).unwrap()
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(GrayImage::new(0, 4, vec![]).is_err());
        assert!(GrayImage::new(2, 2, vec![0; 3]).is_err());
        assert!(GrayImage::new(2, 2, vec![0; 4]).is_ok());
    }

    #[test]
    fn resolution_ratios() {
        let cases = [((1024, 1024), 1.0), ((512, 1024), 0.5), ((4096, 4096), 1.0)];
        for ((h, w), want) in cases {
            let img = GrayImage::filled(h, w, 0).unwrap();
            assert_eq!(resolution_scale(&img, 1024, 1024), want, "{h}x{w}");
        }
    }

    #[test]
    fn sobel_constant_is_zero() {
        let img = GrayImage::filled(7, 9, 128).unwrap();
        assert_eq!(mean_sobel_gradient(&img), 0.0);
    }

    #[test]
    fn sobel_single_interior_pixel() {
        let img = GrayImage::new(3, 3, vec![0, 0, 0, 0, 0, 0, 255, 255, 255]).unwrap();
        assert_eq!(mean_sobel_gradient(&img), 1020.0);
    }

    #[test]
    fn small_images_degenerate_to_zero() {
        let img = GrayImage::new(2, 5, (0..10).map(|v| v * 25).collect()).unwrap();
        assert_eq!(mean_sobel_gradient(&img), 0.0);
        assert_eq!(laplacian_variance(&img), 0.0);
    }

    #[test]
    fn edge_density_cases() {
        let cal = Calibration::new(2.0, 60.0, 10.0, 2000.0, 1e-6).unwrap();
        let flat = GrayImage::filled(8, 8, 40).unwrap();
        assert_eq!(edge_density(&flat, &cal), 0.0);
        assert!((normalize(60.0, 2.0, 60.0, 1e-6) - 1.0).abs() <= 1e-6);
        let v = normalize(31.0, 2.0, 60.0, 1e-6);
        assert_eq!(v, 29.0 / (58.0 + 1e-6));
        assert!((v - 0.5).abs() < 1e-8);
    }

    #[test]
    fn entropy_cases() {
        assert_eq!(gray_entropy(&GrayImage::filled(5, 5, 9).unwrap()), 0.0);
        let two = GrayImage::from_fn(4, 4, |r, _| if r < 2 { 10 } else { 200 }).unwrap();
        assert!((gray_entropy(&two) - 0.125).abs() <= 1e-12);
        assert!((gray_entropy(&all_levels()) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn laplacian_cases() {
        assert_eq!(
            laplacian_variance(&GrayImage::filled(6, 6, 77).unwrap()),
            0.0
        );
        let ramp = GrayImage::from_fn(10, 200, |_, c| c as u8).unwrap();
        assert_eq!(laplacian_variance(&ramp), 0.0);
    }

    #[test]
    fn sharpness_cases() {
        let cal = Calibration::new(2.0, 60.0, 10.0, 2000.0, 1e-6).unwrap();
        assert_eq!(sharpness(&GrayImage::filled(6, 6, 1).unwrap(), &cal), 0.0);
        let v = normalize(1005.0, 10.0, 2000.0, 1e-6);
        assert!((v - 0.5).abs() < 1e-9);
        assert!((normalize(2000.0, 10.0, 2000.0, 1e-6) - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn composed_constant_image() {
        let img = GrayImage::filled(512, 512, 128).unwrap();
        let got = image_complexity(
            &img,
            &ImageWeights::uniform(),
            &Calibration::default(),
            1024,
            1024,
        );
        assert_eq!(
            (got.c_res, got.c_edge, got.c_ent, got.c_lap),
            (0.25, 0.0, 0.0, 0.0)
        );
        assert_eq!(got.total, 0.0625);
    }

    #[test]
    fn weight_selectors() {
        let img = GrayImage::from_fn(40, 30, |r, c| ((r * 7 + c * 13) % 256) as u8).unwrap();
        let res_only = ImageWeights::new(1.0, 0.0, 0.0, 0.0).unwrap();
        let got = image_complexity(&img, &res_only, &Calibration::default(), 1024, 1024);
        assert_eq!(got.total, got.c_res);

        let ent_only = ImageWeights::new(0.0, 0.0, 1.0, 0.0).unwrap();
        let got = image_complexity(
            &all_levels(),
            &ent_only,
            &Calibration::default(),
            1024,
            1024,
        );
        assert!((got.total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn weights_normalize_or_reject() {
        let w = ImageWeights::new(2.0, 2.0, 2.0, 2.0).unwrap();
        assert_eq!(w, ImageWeights::uniform());
        assert!(ImageWeights::new(-0.1, 0.5, 0.3, 0.3).is_err());
        assert!(ImageWeights::new(0.0, 0.0, 0.0, 0.0).is_err());
        assert!(ImageWeights::new(f64::NAN, 1.0, 0.0, 0.0).is_err());
    }
}
