//! Per-modality edge/cloud routing.
//!
//! A modality stays on the edge only when all three gates pass:
//! its complexity is at most the modality threshold, the edge load is at most
//! `ell_max`, and the bandwidth gate holds. Every comparison is inclusive.
//! By default the bandwidth gate is `b <= beta`; setting
//! `bandwidth_gate_literal = false` flips it to `b >= beta`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Text,
    Image,
}

impl Modality {
    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Text => "text",
            Modality::Image => "image",
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Modality::Text),
            "image" => Ok(Modality::Image),
            other => Err(Error::domain(format!("unknown modality `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Edge,
    Cloud,
}

impl Decision {
    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Edge => "edge",
            Decision::Cloud => "cloud",
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Snapshot of edge load and link bandwidth taken once per request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemState {
    load: f64,
    bandwidth_mbps: f64,
}

impl SystemState {
    pub fn new(load: f64, bandwidth_mbps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&load) {
            return Err(Error::domain(format!(
                "edge load must be in [0, 1], got {load}"
            )));
        }
        if !(bandwidth_mbps.is_finite() && bandwidth_mbps > 0.0) {
            return Err(Error::domain(format!(
                "bandwidth must be positive, got {bandwidth_mbps}"
            )));
        }
        Ok(Self {
            load,
            bandwidth_mbps,
        })
    }

    pub fn load(&self) -> f64 {
        self.load
    }

    pub fn bandwidth_mbps(&self) -> f64 {
        self.bandwidth_mbps
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub tau_text: f64,
    pub tau_image: f64,
    pub ell_max: f64,
    pub beta_bw_mbps: f64,
    /// `true`: edge requires `b <= beta`. `false`: edge requires `b >= beta`.
    pub bandwidth_gate_literal: bool,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            tau_text: 0.5,
            tau_image: 0.5,
            ell_max: 0.8,
            beta_bw_mbps: 400.0,
            bandwidth_gate_literal: true,
        }
    }
}

impl PolicyConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tau_text", self.tau_text),
            ("tau_image", self.tau_image),
            ("ell_max", self.ell_max),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::domain(format!("{name} must be in [0, 1], got {v}")));
            }
        }
        if !(self.beta_bw_mbps.is_finite() && self.beta_bw_mbps > 0.0) {
            return Err(Error::domain(format!(
                "beta_bw_mbps must be positive, got {}",
                self.beta_bw_mbps
            )));
        }
        Ok(())
    }

    pub fn threshold(&self, m: Modality) -> f64 {
        match m {
            Modality::Text => self.tau_text,
            Modality::Image => self.tau_image,
        }
    }

    pub fn bandwidth_gate(&self, bandwidth_mbps: f64) -> bool {
        if self.bandwidth_gate_literal {
            bandwidth_mbps <= self.beta_bw_mbps
        } else {
            bandwidth_mbps >= self.beta_bw_mbps
        }
    }

    /// Load and bandwidth gates together.
    pub fn state_permits_edge(&self, state: &SystemState) -> bool {
        state.load <= self.ell_max && self.bandwidth_gate(state.bandwidth_mbps)
    }
}

pub(crate) fn check_complexity(c: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&c) {
        Ok(c)
    } else {
        Err(Error::domain(format!(
            "complexity must be in [0, 1], got {c}"
        )))
    }
}

pub fn decide_modality(
    c: f64,
    m: Modality,
    state: &SystemState,
    cfg: &PolicyConfig,
) -> Result<Decision> {
    let c = check_complexity(c)?;
    if c <= cfg.threshold(m) && cfg.state_permits_edge(state) {
        Ok(Decision::Edge)
    } else {
        Ok(Decision::Cloud)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoutedModality {
    pub modality: Modality,
    pub complexity: f64,
    pub decision: Decision,
}

/// Per-modality decisions for one request, in input order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecisionVector(Vec<RoutedModality>);

impl DecisionVector {
    pub fn entries(&self) -> &[RoutedModality] {
        &self.0
    }

    pub fn decisions(&self) -> impl Iterator<Item = Decision> + '_ {
        self.0.iter().map(|e| e.decision)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Routes every modality of a request against the same state snapshot.
pub fn decide_request(
    scores: &[(Modality, f64)],
    state: &SystemState,
    cfg: &PolicyConfig,
) -> Result<DecisionVector> {
    if scores.is_empty() {
        return Err(Error::domain("a request needs at least one modality"));
    }
    scores
        .iter()
        .map(|&(modality, complexity)| {
            decide_modality(complexity, modality, state, cfg).map(|decision| RoutedModality {
                modality,
                complexity,
                decision,
            })
        })
        .collect::<Result<Vec<_>>>()
        .map(DecisionVector)
}
