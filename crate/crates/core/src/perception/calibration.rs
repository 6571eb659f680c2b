use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, Error, Result};

pub const DEFAULT_EPSILON: f64 = 1e-6;

/// P5/P95 normalization constants for the gradient-mean and
/// Laplacian-variance statistics, fitted over a calibration corpus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub grad_p5: f64,
    pub grad_p95: f64,
    pub lap_p5: f64,
    pub lap_p95: f64,
    pub epsilon: f64,
}

const KEYS: [&str; 5] = ["grad_p5", "grad_p95", "lap_p5", "lap_p95", "epsilon"];

impl Calibration {
    pub fn new(
        grad_p5: f64,
        grad_p95: f64,
        lap_p5: f64,
        lap_p95: f64,
        epsilon: f64,
    ) -> Result<Self> {
        let cal = Self {
            grad_p5,
            grad_p95,
            lap_p5,
            lap_p95,
            epsilon,
        };
        cal.validate()?;
        Ok(cal)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.grad_p5,
            self.grad_p95,
            self.lap_p5,
            self.lap_p95,
            self.epsilon,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain(format!(
                "calibration values must be finite: {self:?}"
            )));
        }
        if self.grad_p5 > self.grad_p95 {
            return Err(Error::domain("calibration requires grad_p5 <= grad_p95"));
        }
        if self.lap_p5 > self.lap_p95 {
            return Err(Error::domain("calibration requires lap_p5 <= lap_p95"));
        }
        if self.epsilon <= 0.0 {
            return Err(Error::domain("calibration epsilon must be positive"));
        }
        Ok(())
    }

    /// Renders the flat `key = value` document.
    pub fn to_document(&self) -> String {
        let mut out = String::new();
        for (key, value) in KEYS.iter().zip(self.values()) {
            // f64 Display never uses exponent notation and round-trips exactly.
            let _ = writeln!(out, "{key} = {}", decimal(value));
        }
        out
    }

    /// Parses a flat `key = value` document. Blank lines and `#` comments are
    /// ignored; each of the five keys must appear exactly once.
    pub fn from_document(text: &str) -> Result<Self> {
        let mut slots: [Option<f64>; 5] = [None; 5];
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let invalid = |key: &str, reason: String| {
                Error::Config(ConfigError::Invalid {
                    section: "calibration".into(),
                    key: key.into(),
                    reason: format!("line {}: {reason}", idx + 1),
                })
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| invalid(line, "expected `key = value`".into()))?;
            let key = key.trim();
            let slot = KEYS.iter().position(|k| *k == key).ok_or_else(|| {
                Error::Config(ConfigError::UnknownKey {
                    section: "calibration".into(),
                    key: key.into(),
                })
            })?;
            if slots[slot].is_some() {
                return Err(invalid(key, "duplicate key".into()));
            }
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|e| invalid(key, format!("not a decimal number: {e}")))?;
            slots[slot] = Some(value);
        }
        let mut values = [0.0; 5];
        for (i, slot) in slots.iter().enumerate() {
            values[i] = slot.ok_or_else(|| {
                Error::Config(ConfigError::Invalid {
                    section: "calibration".into(),
                    key: KEYS[i].into(),
                    reason: "missing".into(),
                })
            })?;
        }
        Self::new(values[0], values[1], values[2], values[3], values[4])
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_document(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_document()).map_err(|e| Error::io(path, e))
    }

    fn values(&self) -> [f64; 5] {
        [
            self.grad_p5,
            self.grad_p95,
            self.lap_p5,
            self.lap_p95,
            self.epsilon,
        ]
    }
}

impl Default for Calibration {
    fn default() -> Self {
        Self {
            grad_p5: 2.0,
            grad_p95: 60.0,
            lap_p5: 10.0,
            lap_p95: 2000.0,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

/// `{}` for f64 prints integers without a radix point; keep one so the
/// document always reads as decimal.
pub(crate) fn decimal(v: f64) -> String {
    let s = v.to_string();
    if s.contains('.') || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

/// `clip((x - p5) / (p95 - p5 + eps), 0, 1)`
pub fn normalize(x: f64, p5: f64, p95: f64, eps: f64) -> f64 {
    ((x - p5) / (p95 - p5 + eps)).clamp(0.0, 1.0)
}

/// Linear-interpolation percentile over an already sorted slice:
/// rank `r = p/100 * (n-1)`, then interpolate between the neighbours of `r`.
pub fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of an empty slice");
    let rank = (p / 100.0) * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let frac = rank - lo as f64;
    match sorted.get(lo + 1) {
        Some(hi) if frac > 0.0 => sorted[lo] + frac * (hi - sorted[lo]),
        _ => sorted[lo],
    }
}

fn sorted_finite(values: &[f64], what: &str) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(Error::CalibrationFailed(format!(
            "need at least 2 {what} values, got {}",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::CalibrationFailed(format!(
            "{what} values must be finite"
        )));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

pub fn fit_calibration(
    gradient_means: &[f64],
    laplacian_variances: &[f64],
    epsilon: f64,
) -> Result<Calibration> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::CalibrationFailed(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let grad = sorted_finite(gradient_means, "gradient-mean")?;
    let lap = sorted_finite(laplacian_variances, "laplacian-variance")?;
    Calibration::new(
        percentile_sorted(&grad, 5.0),
        percentile_sorted(&grad, 95.0),
        percentile_sorted(&lap, 5.0),
        percentile_sorted(&lap, 95.0),
        epsilon,
    )
}
