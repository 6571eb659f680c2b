//! Python bindings for `moaoff_core`.

use std::path::Path;

use moaoff_core::config::Config;
use moaoff_core::perception::{self, ImageWeights};
use moaoff_core::policy::{self, Modality, SystemState};
use moaoff_core::sim::{self, SimMetrics, Strategy};
use moaoff_core::workload;
use moaoff_core::Error;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    if e.is_io_or_parse() {
        PyIOError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn modality(name: &str) -> PyResult<Modality> {
    name.parse::<Modality>()
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pyclass(name = "GrayImage", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGrayImage(perception::GrayImage);

#[pymethods]
impl PyGrayImage {
    #[new]
    fn new(height: usize, width: usize, pixels: Vec<u8>) -> PyResult<Self> {
        perception::GrayImage::new(height, width, pixels)
            .map(Self)
            .map_err(to_py)
    }

    #[getter]
    fn height(&self) -> usize {
        self.0.height()
    }

    #[getter]
    fn width(&self) -> usize {
        self.0.width()
    }

    #[getter]
    fn pixels(&self) -> Vec<u8> {
        self.0.pixels().to_vec()
    }

    fn __repr__(&self) -> String {
        format!(
            "GrayImage(height={}, width={})",
            self.0.height(),
            self.0.width()
        )
    }
}

#[pyclass(name = "Calibration", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyCalibration(perception::Calibration);

#[pymethods]
impl PyCalibration {
    #[new]
    #[pyo3(signature = (grad_p5, grad_p95, lap_p5, lap_p95, epsilon = perception::DEFAULT_EPSILON))]
    fn new(grad_p5: f64, grad_p95: f64, lap_p5: f64, lap_p95: f64, epsilon: f64) -> PyResult<Self> {
        perception::Calibration::new(grad_p5, grad_p95, lap_p5, lap_p95, epsilon)
            .map(Self)
            .map_err(to_py)
    }

    #[staticmethod]
    fn default() -> Self {
        Self(perception::Calibration::default())
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        perception::Calibration::load(path).map(Self).map_err(to_py)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.0.save(path).map_err(to_py)
    }

    fn to_document(&self) -> String {
        self.0.to_document()
    }

    #[getter]
    fn grad_p5(&self) -> f64 {
        self.0.grad_p5
    }

    #[getter]
    fn grad_p95(&self) -> f64 {
        self.0.grad_p95
    }

    #[getter]
    fn lap_p5(&self) -> f64 {
        self.0.lap_p5
    }

    #[getter]
    fn lap_p95(&self) -> f64 {
        self.0.lap_p95
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.0.epsilon
    }

    fn __repr__(&self) -> String {
        let c = &self.0;
        format!(
            "Calibration(grad_p5={}, grad_p95={}, lap_p5={}, lap_p95={}, epsilon={})",
            c.grad_p5, c.grad_p95, c.lap_p5, c.lap_p95, c.epsilon
        )
    }
}

#[pyclass(name = "PolicyConfig", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPolicyConfig(policy::PolicyConfig);

#[pymethods]
impl PyPolicyConfig {
    #[new]
    #[pyo3(signature = (tau_text = None, tau_image = None, ell_max = None, beta_bw_mbps = None, bandwidth_gate_literal = None))]
    fn new(
        tau_text: Option<f64>,
        tau_image: Option<f64>,
        ell_max: Option<f64>,
        beta_bw_mbps: Option<f64>,
        bandwidth_gate_literal: Option<bool>,
    ) -> PyResult<Self> {
        let d = policy::PolicyConfig::default();
        let cfg = policy::PolicyConfig {
            tau_text: tau_text.unwrap_or(d.tau_text),
            tau_image: tau_image.unwrap_or(d.tau_image),
            ell_max: ell_max.unwrap_or(d.ell_max),
            beta_bw_mbps: beta_bw_mbps.unwrap_or(d.beta_bw_mbps),
            bandwidth_gate_literal: bandwidth_gate_literal.unwrap_or(d.bandwidth_gate_literal),
        };
        cfg.validate().map_err(to_py)?;
        Ok(Self(cfg))
    }

    #[getter]
    fn tau_text(&self) -> f64 {
        self.0.tau_text
    }

    #[getter]
    fn tau_image(&self) -> f64 {
        self.0.tau_image
    }

    #[getter]
    fn ell_max(&self) -> f64 {
        self.0.ell_max
    }

    #[getter]
    fn beta_bw_mbps(&self) -> f64 {
        self.0.beta_bw_mbps
    }

    #[getter]
    fn bandwidth_gate_literal(&self) -> bool {
        self.0.bandwidth_gate_literal
    }

    fn __repr__(&self) -> String {
        let c = &self.0;
        format!(
            "PolicyConfig(tau_text={}, tau_image={}, ell_max={}, beta_bw_mbps={}, bandwidth_gate_literal={})",
            c.tau_text, c.tau_image, c.ell_max, c.beta_bw_mbps, c.bandwidth_gate_literal
        )
    }
}

#[pyfunction]
fn load_gray(path: &str) -> PyResult<PyGrayImage> {
    workload::load_gray(path).map(PyGrayImage).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (image, calibration = None, weights = None, ref_height = 1024, ref_width = 1024))]
fn image_complexity<'py>(
    py: Python<'py>,
    image: &PyGrayImage,
    calibration: Option<&PyCalibration>,
    weights: Option<(f64, f64, f64, f64)>,
    ref_height: usize,
    ref_width: usize,
) -> PyResult<Bound<'py, PyDict>> {
    if ref_height == 0 || ref_width == 0 {
        return Err(PyValueError::new_err(
            "reference resolution must be positive",
        ));
    }
    let weights = match weights {
        Some((a, b, c, d)) => ImageWeights::new(a, b, c, d).map_err(to_py)?,
        None => ImageWeights::uniform(),
    };
    let cal = calibration.map(|c| c.0).unwrap_or_default();
    let s = perception::image_complexity(&image.0, &weights, &cal, ref_height, ref_width);
    let d = PyDict::new(py);
    d.set_item("c_res", s.c_res)?;
    d.set_item("c_edge", s.c_edge)?;
    d.set_item("c_ent", s.c_ent)?;
    d.set_item("c_lap", s.c_lap)?;
    d.set_item("total", s.total)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (text, l0 = 512, gamma = 3.0, beta_l = 0.5, beta_ner = 0.5))]
fn text_complexity<'py>(
    py: Python<'py>,
    text: &str,
    l0: u64,
    gamma: f64,
    beta_l: f64,
    beta_ner: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let params = perception::TextParams::new(l0, gamma, beta_l, beta_ner).map_err(to_py)?;
    let f = perception::text_features(text);
    let s = perception::complexity_from_features(&f, &params);
    let d = PyDict::new(py);
    d.set_item("tokens", f.token_count)?;
    d.set_item("entities", f.entity_count)?;
    d.set_item("sentences", f.sentence_count)?;
    d.set_item("c_l", s.c_l)?;
    d.set_item("c_ner", s.c_ner)?;
    d.set_item("total", s.total)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (gradient_means, laplacian_variances, epsilon = perception::DEFAULT_EPSILON))]
fn fit_calibration(
    gradient_means: Vec<f64>,
    laplacian_variances: Vec<f64>,
    epsilon: f64,
) -> PyResult<PyCalibration> {
    perception::fit_calibration(&gradient_means, &laplacian_variances, epsilon)
        .map(PyCalibration)
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (complexity, modality, load, bandwidth_mbps, policy = None))]
fn decide(
    complexity: f64,
    modality: &str,
    load: f64,
    bandwidth_mbps: f64,
    policy: Option<&PyPolicyConfig>,
) -> PyResult<&'static str> {
    let state = SystemState::new(load, bandwidth_mbps).map_err(to_py)?;
    let cfg = policy.map(|p| p.0).unwrap_or_default();
    let m = self::modality(modality)?;
    let d = policy::decide_modality(complexity, m, &state, &cfg).map_err(to_py)?;
    Ok(d.as_str())
}

#[pyfunction]
#[pyo3(signature = (scores, load, bandwidth_mbps, policy = None))]
fn decide_request(
    scores: Vec<(String, f64)>,
    load: f64,
    bandwidth_mbps: f64,
    policy: Option<&PyPolicyConfig>,
) -> PyResult<Vec<&'static str>> {
    let state = SystemState::new(load, bandwidth_mbps).map_err(to_py)?;
    let cfg = policy.map(|p| p.0).unwrap_or_default();
    let scores = scores
        .iter()
        .map(|(m, c)| Ok((modality(m)?, *c)))
        .collect::<PyResult<Vec<_>>>()?;
    let v = policy::decide_request(&scores, &state, &cfg).map_err(to_py)?;
    Ok(v.decisions().map(|d| d.as_str()).collect())
}

fn metrics_dict<'py>(
    py: Python<'py>,
    strategy: &str,
    bw: f64,
    m: &SimMetrics,
) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("strategy", strategy)?;
    d.set_item("bandwidth_mbps", bw)?;
    d.set_item("requests", m.requests)?;
    d.set_item("tasks", m.tasks)?;
    d.set_item("mean_s", m.mean_s)?;
    d.set_item("p50_s", m.p50_s)?;
    d.set_item("p95_s", m.p95_s)?;
    d.set_item("p99_s", m.p99_s)?;
    d.set_item("acc_proxy", m.acc_proxy)?;
    d.set_item("frac_offloaded", m.frac_offloaded)?;
    d.set_item("edge_busy_s", m.edge_busy_s)?;
    d.set_item("cloud_busy_s", m.cloud_busy_s)?;
    d.set_item("bytes_uploaded", m.bytes_uploaded)?;
    d.set_item("peak_edge_mem_mb", m.peak_edge_mem_mb)?;
    d.set_item("peak_cloud_mem_mb", m.peak_cloud_mem_mb)?;
    d.set_item("edge_spills", m.edge_spills)?;
    Ok(d)
}

/// Runs one strategy on a trace file or, without `workload`, on the
/// synthetic generator from the config.
#[pyfunction]
#[pyo3(signature = (strategy, bandwidth_mbps, workload = None, config = None, requests = None, seed = None, policy = None))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    strategy: &str,
    bandwidth_mbps: f64,
    workload: Option<&str>,
    config: Option<&str>,
    requests: Option<usize>,
    seed: Option<u64>,
    policy: Option<&PyPolicyConfig>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = match config {
        Some(p) => Config::load(Path::new(p)).map_err(to_py)?,
        None => Config::default(),
    };
    if let Some(p) = policy {
        cfg.policy = p.0;
    }
    let seed = seed.unwrap_or(cfg.simulation.seed);
    let strategy = Strategy::parse(strategy, cfg.simulation.uniform_threshold).map_err(to_py)?;
    let requests = match workload {
        Some(path) => self::workload::load_workload(path, &cfg.perception).map_err(to_py)?,
        None => {
            if let Some(n) = requests {
                cfg.synthetic.request_count = n;
            }
            cfg.synthetic.seed = seed;
            self::workload::synthesize_workload(&cfg.synthetic).map_err(to_py)?
        }
    };
    let report = py
        .detach(|| {
            sim::simulate(
                &requests,
                strategy,
                &cfg.policy,
                &cfg.cost_model,
                bandwidth_mbps,
                seed,
            )
        })
        .map_err(to_py)?;
    metrics_dict(py, &report.strategy, report.bandwidth_mbps, &report.metrics)
}

#[pymodule]
fn moaoff(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrayImage>()?;
    m.add_class::<PyCalibration>()?;
    m.add_class::<PyPolicyConfig>()?;
    m.add_function(wrap_pyfunction!(load_gray, m)?)?;
    m.add_function(wrap_pyfunction!(image_complexity, m)?)?;
    m.add_function(wrap_pyfunction!(text_complexity, m)?)?;
    m.add_function(wrap_pyfunction!(fit_calibration, m)?)?;
    m.add_function(wrap_pyfunction!(decide, m)?)?;
    m.add_function(wrap_pyfunction!(decide_request, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
