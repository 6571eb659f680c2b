//! Modality-aware complexity scoring and adaptive edge/cloud offloading.
//!
//! The crate is split along the data flow of a request:
//!
//! - [`perception`] turns raw inputs (gray images, text) into complexity
//!   scores in `[0, 1]`.
//! - [`policy`] maps per-modality scores plus the live system state to an
//!   edge or cloud decision.
//! - [`sim`] replays a workload through a discrete-event model of one edge
//!   device and an elastic cloud, for the adaptive policy and the baselines.
//! - [`workload`] reads and writes images, workload traces and calibration
//!   corpora, and synthesizes seeded workloads.
//! - [`config`] is the TOML configuration document shared by the CLI and the
//!   Python bindings.

pub mod config;
pub mod error;
pub mod perception;
pub mod policy;
pub mod sim;
pub mod workload;

pub use config::Config;
pub use error::{Error, Result};
pub use perception::{
    Calibration, GrayImage, ImageComplexity, ImageWeights, PerceptionConfig, TextComplexity,
    TextFeatures, TextParams,
};
pub use policy::{Decision, DecisionVector, Modality, PolicyConfig, SystemState};
pub use sim::{AblationReport, CostModel, ModalityTask, Request, SimReport, Strategy};
pub use workload::SyntheticSpec;
