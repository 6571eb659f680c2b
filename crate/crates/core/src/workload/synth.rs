use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::Modality;
use crate::sim::{ModalityTask, Request};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "lowercase")]
pub enum ComplexityDist {
    Uniform { low: f64, high: f64 },
    Beta { alpha: f64, beta: f64 },
}

impl ComplexityDist {
    fn validate(&self) -> Result<()> {
        match *self {
            ComplexityDist::Uniform { low, high } => {
                if !(0.0 <= low && low <= high && high <= 1.0) {
                    return Err(Error::domain(format!(
                        "uniform complexity needs 0 <= low <= high <= 1, got [{low}, {high}]"
                    )));
                }
            }
            ComplexityDist::Beta { alpha, beta } => {
                if !(alpha.is_finite() && alpha > 0.0 && beta.is_finite() && beta > 0.0) {
                    return Err(Error::domain(format!(
                        "beta complexity needs positive shapes, got ({alpha}, {beta})"
                    )));
                }
            }
        }
        Ok(())
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            ComplexityDist::Uniform { low, high } => {
                if low == high {
                    low
                } else {
                    rng.random_range(low..high)
                }
            }
            ComplexityDist::Beta { alpha, beta } => Beta::new(alpha, beta)
                .expect("validated shapes")
                .sample(rng)
                .clamp(0.0, 1.0),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            ComplexityDist::Uniform { low, high } => (low + high) / 2.0,
            ComplexityDist::Beta { alpha, beta } => alpha / (alpha + beta),
        }
    }
}

/// Payload size drawn log-uniformly from `[min_bytes, max_bytes]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayloadRange {
    pub min_bytes: u64,
    pub max_bytes: u64,
}

impl PayloadRange {
    fn sample(&self, rng: &mut ChaCha8Rng) -> u64 {
        if self.min_bytes == self.max_bytes {
            return self.min_bytes;
        }
        let (lo, hi) = ((self.min_bytes as f64).ln(), (self.max_bytes as f64).ln());
        (rng.random_range(lo..hi).exp().round() as u64).clamp(self.min_bytes, self.max_bytes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModalitySpec {
    pub complexity: ComplexityDist,
    pub payload: PayloadRange,
}

/// Seeded generator parameters. Every request carries one image task
/// followed by one text task.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub request_count: usize,
    /// Poisson arrival rate, requests per second.
    pub arrival_rate: f64,
    pub image: ModalitySpec,
    pub text: ModalitySpec,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            request_count: 5000,
            arrival_rate: 3.0,
            image: ModalitySpec {
                complexity: ComplexityDist::Beta {
                    alpha: 1.5,
                    beta: 3.0,
                },
                payload: PayloadRange {
                    min_bytes: 4_000_000,
                    max_bytes: 16_000_000,
                },
            },
            text: ModalitySpec {
                complexity: ComplexityDist::Beta {
                    alpha: 2.5,
                    beta: 2.0,
                },
                payload: PayloadRange {
                    min_bytes: 200,
                    max_bytes: 4000,
                },
            },
            seed: 7,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.arrival_rate.is_finite() && self.arrival_rate > 0.0) {
            return Err(Error::domain(format!(
                "arrival_rate must be positive, got {}",
                self.arrival_rate
            )));
        }
        for (name, m) in [("image", &self.image), ("text", &self.text)] {
            m.complexity.validate()?;
            if m.payload.min_bytes == 0 || m.payload.min_bytes > m.payload.max_bytes {
                return Err(Error::domain(format!(
                    "{name} payload range needs 1 <= min <= max, got [{}, {}]",
                    m.payload.min_bytes, m.payload.max_bytes
                )));
            }
        }
        Ok(())
    }
}

pub fn synthesize_workload(spec: &SyntheticSpec) -> Result<Vec<Request>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let gaps = Exp::new(spec.arrival_rate).expect("validated rate");
    let mut t = 0.0;
    let mut out = Vec::with_capacity(spec.request_count);
    for id in 0..spec.request_count as u64 {
        t += gaps.sample(&mut rng);
        let image_c = spec.image.complexity.sample(&mut rng);
        let image_bytes = spec.image.payload.sample(&mut rng);
        let text_c = spec.text.complexity.sample(&mut rng);
        let text_bytes = spec.text.payload.sample(&mut rng);
        out.push(Request {
            id,
            arrival_time: t,
            tasks: vec![
                ModalityTask::new(Modality::Image, image_c, image_bytes)?,
                ModalityTask::new(Modality::Text, text_c, text_bytes)?,
            ],
        });
    }
    Ok(out)
}
