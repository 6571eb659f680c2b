//! Lightweight per-modality complexity scores.
//!
//! Image complexity is a weighted sum of four indicators, each in `[0, 1]`:
//! resolution relative to a reference size, calibrated mean Sobel gradient,
//! normalized gray-level entropy, and calibrated Laplacian variance. Text
//! complexity combines a saturating token count with a saturating
//! entities-per-sentence ratio.
//!
//! Every function here is pure.

mod calibration;
mod image;
mod text;

use serde::{Deserialize, Serialize};

pub(crate) use calibration::decimal;
pub use calibration::{
    fit_calibration, normalize, percentile_sorted, Calibration, DEFAULT_EPSILON,
};
pub use image::{
    edge_density, gray_entropy, image_complexity, laplacian_variance, mean_sobel_gradient,
    resolution_scale, sharpness, GrayImage, ImageComplexity, ImageWeights,
};
pub use text::{
    complexity_from_features, count_entities, split_sentences, text_complexity, text_features,
    tokenize, TextComplexity, TextFeatures, TextParams,
};

use crate::error::{Error, Result};

/// Everything needed to score an image or a text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerceptionConfig {
    pub ref_height: usize,
    pub ref_width: usize,
    pub weights: ImageWeights,
    pub calibration: Calibration,
    pub text: TextParams,
}

impl Default for PerceptionConfig {
    fn default() -> Self {
        Self {
            ref_height: 1024,
            ref_width: 1024,
            weights: ImageWeights::uniform(),
            calibration: Calibration::default(),
            text: TextParams::default(),
        }
    }
}

impl PerceptionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ref_height == 0 || self.ref_width == 0 {
            return Err(Error::domain("reference resolution must be positive"));
        }
        self.calibration.validate()?;
        self.text.validate()
    }

    pub fn score_image(&self, img: &GrayImage) -> ImageComplexity {
        image_complexity(
            img,
            &self.weights,
            &self.calibration,
            self.ref_height,
            self.ref_width,
        )
    }

    pub fn score_text(&self, text: &str) -> TextComplexity {
        text_complexity(text, &self.text)
    }
}
