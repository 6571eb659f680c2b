//! File formats and workload sources: netpbm images, JSONL traces,
//! calibration corpora and seeded synthetic workloads.

mod pnm;
mod synth;
mod trace;

use std::path::{Path, PathBuf};

pub use pnm::{
    decode_gray, decode_pgm, decode_ppm_as_gray, encode_pgm, load_gray, load_pgm, load_ppm_as_gray,
    rec601_luma, save_pgm,
};
pub use synth::{synthesize_workload, ComplexityDist, ModalitySpec, PayloadRange, SyntheticSpec};
pub use trace::{load_workload, parse_workload, workload_to_jsonl};

use crate::error::{Error, Result};
use crate::perception::{
    fit_calibration, laplacian_variance, mean_sobel_gradient, Calibration, DEFAULT_EPSILON,
};

#[derive(Debug, Clone)]
pub struct CalibrationFit {
    pub calibration: Calibration,
    pub images_used: usize,
    /// Files that could not be read or decoded, with the reason.
    pub skipped: Vec<(PathBuf, String)>,
}

/// Fits P5/P95 constants over the per-image gradient means and Laplacian
/// variances of `paths`. Unreadable files are skipped; fewer than two
/// readable images is an error.
pub fn collect_calibration<P: AsRef<Path>>(paths: &[P]) -> Result<CalibrationFit> {
    let mut grads = Vec::with_capacity(paths.len());
    let mut laps = Vec::with_capacity(paths.len());
    let mut skipped = Vec::new();
    for p in paths {
        match load_gray(p) {
            Ok(img) => {
                grads.push(mean_sobel_gradient(&img));
                laps.push(laplacian_variance(&img));
            }
            Err(e) => skipped.push((p.as_ref().to_path_buf(), e.to_string())),
        }
    }
    if grads.len() < 2 {
        return Err(Error::CalibrationFailed(format!(
            "need at least 2 readable images, found {} ({} skipped)",
            grads.len(),
            skipped.len()
        )));
    }
    Ok(CalibrationFit {
        calibration: fit_calibration(&grads, &laps, DEFAULT_EPSILON)?,
        images_used: grads.len(),
        skipped,
    })
}

/// Netpbm files (`.pgm`, `.ppm`, `.pnm`) directly inside `dir`, sorted by
/// file name.
pub fn image_files_in(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_pnm = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "pgm" | "ppm" | "pnm"));
        if is_pnm && path.is_file() {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}
