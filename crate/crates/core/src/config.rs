//! TOML configuration document.
//!
//! ```toml
//! schema = 1
//! [perception]   # h0, w0, w_res.., l0, gamma, beta_l, beta_ner, calibration
//! [policy]       # tau_text, tau_image, ell_max, beta_bw_mbps, bandwidth_gate_literal
//! [cost_model]   # CostModel fields
//! [simulation]   # bandwidths_mbps, seed, strategies, uniform_threshold, ablation_bandwidth_mbps
//! [synthetic]    # request_count, arrival_rate, seed, *_complexity, *_bytes
//! ```
//!
//! Every key is optional and falls back to the built-in default. Unknown
//! sections and keys are rejected by name. Calibration comes either from
//! inline `grad_p5`.. keys or from `calibration_file`, a flat key-value
//! document resolved against the config file's directory.

use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use toml::{Table, Value};

use crate::error::{ConfigError, Error, Result};
use crate::perception::{decimal, Calibration, ImageWeights, PerceptionConfig, TextParams};
use crate::policy::PolicyConfig;
use crate::sim::{CostModel, Strategy};
use crate::workload::{ComplexityDist, PayloadRange, SyntheticSpec};

pub const SCHEMA_VERSION: i64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub bandwidths_mbps: Vec<f64>,
    pub seed: u64,
    pub strategies: Vec<Strategy>,
    pub uniform_threshold: f64,
    pub ablation_bandwidth_mbps: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            bandwidths_mbps: vec![200.0, 300.0, 400.0],
            seed: 7,
            strategies: Strategy::all(0.5).to_vec(),
            uniform_threshold: 0.5,
            ablation_bandwidth_mbps: 300.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Config {
    pub perception: PerceptionConfig,
    pub policy: PolicyConfig,
    pub cost_model: CostModel,
    pub simulation: SimulationConfig,
    pub synthetic: SyntheticSpec,
}

fn invalid(section: &str, key: &str, reason: impl Into<String>) -> Error {
    ConfigError::Invalid {
        section: section.into(),
        key: key.into(),
        reason: reason.into(),
    }
    .into()
}

/// Typed accessor over one TOML table that remembers which keys were read.
struct Section<'a> {
    name: &'static str,
    table: Option<&'a Table>,
    seen: Vec<&'static str>,
}

impl<'a> Section<'a> {
    fn new(root: &'a Table, name: &'static str) -> Result<Self> {
        let table = match root.get(name) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(_) => return Err(invalid(name, name, "expected a table")),
        };
        Ok(Self {
            name,
            table,
            seen: Vec::new(),
        })
    }

    fn raw(&mut self, key: &'static str) -> Option<&'a Value> {
        self.seen.push(key);
        self.table.and_then(|t| t.get(key))
    }

    fn has(&self, key: &str) -> bool {
        self.table.is_some_and(|t| t.contains_key(key))
    }

    fn err(&self, key: &str, reason: impl Into<String>) -> Error {
        invalid(self.name, key, reason)
    }

    fn f64(&mut self, key: &'static str, default: f64) -> Result<f64> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => {
                as_f64(v).ok_or_else(|| self.err(key, format!("expected a number, got {v}")))
            }
        }
    }

    fn f64_in(
        &mut self,
        key: &'static str,
        default: f64,
        range: RangeInclusive<f64>,
    ) -> Result<f64> {
        let v = self.f64(key, default)?;
        if range.contains(&v) {
            Ok(v)
        } else {
            Err(self.err(
                key,
                format!("{v} outside [{}, {}]", range.start(), range.end()),
            ))
        }
    }

    fn non_negative(&mut self, key: &'static str, default: f64) -> Result<f64> {
        let v = self.f64(key, default)?;
        if v.is_finite() && v >= 0.0 {
            Ok(v)
        } else {
            Err(self.err(key, format!("must be finite and >= 0, got {v}")))
        }
    }

    fn positive(&mut self, key: &'static str, default: f64) -> Result<f64> {
        let v = self.f64(key, default)?;
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(self.err(key, format!("must be positive, got {v}")))
        }
    }

    fn u64(&mut self, key: &'static str, default: u64) -> Result<u64> {
        match self.raw(key) {
            None => Ok(default),
            Some(Value::Integer(i)) if *i >= 0 => Ok(*i as u64),
            Some(v) => Err(self.err(key, format!("expected a non-negative integer, got {v}"))),
        }
    }

    fn positive_u64(&mut self, key: &'static str, default: u64) -> Result<u64> {
        let v = self.u64(key, default)?;
        if v == 0 {
            return Err(self.err(key, "must be at least 1"));
        }
        Ok(v)
    }

    fn bool(&mut self, key: &'static str, default: bool) -> Result<bool> {
        match self.raw(key) {
            None => Ok(default),
            Some(Value::Boolean(b)) => Ok(*b),
            Some(v) => Err(self.err(key, format!("expected true or false, got {v}"))),
        }
    }

    fn string(&mut self, key: &'static str) -> Result<Option<String>> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(v) => Err(self.err(key, format!("expected a string, got {v}"))),
        }
    }

    fn array(&mut self, key: &'static str) -> Result<Option<&'a Vec<Value>>> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::Array(a)) => Ok(Some(a)),
            Some(v) => Err(self.err(key, format!("expected an array, got {v}"))),
        }
    }

    fn byte_range(&mut self, key: &'static str, default: PayloadRange) -> Result<PayloadRange> {
        let Some(items) = self.array(key)? else {
            return Ok(default);
        };
        match items.as_slice() {
            [Value::Integer(lo), Value::Integer(hi)] if 1 <= *lo && lo <= hi => Ok(PayloadRange {
                min_bytes: *lo as u64,
                max_bytes: *hi as u64,
            }),
            _ => Err(self.err(key, "expected [min_bytes, max_bytes] with 1 <= min <= max")),
        }
    }

    fn complexity_dist(
        &mut self,
        key: &'static str,
        default: ComplexityDist,
    ) -> Result<ComplexityDist> {
        let Some(v) = self.raw(key) else {
            return Ok(default);
        };
        let Value::Table(t) = v else {
            return Err(self.err(key, "expected an inline table with `dist`"));
        };
        let num = |k: &str| -> Result<f64> {
            t.get(k)
                .and_then(as_f64)
                .ok_or_else(|| self.err(key, format!("missing numeric `{k}`")))
        };
        let allowed: &[&str] = match t.get("dist").and_then(Value::as_str) {
            Some("uniform") => &["dist", "low", "high"],
            Some("beta") => &["dist", "alpha", "beta"],
            _ => return Err(self.err(key, "`dist` must be \"uniform\" or \"beta\"")),
        };
        if let Some(extra) = t.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(self.err(key, format!("unknown field `{extra}`")));
        }
        let dist = if allowed[1] == "low" {
            ComplexityDist::Uniform {
                low: num("low")?,
                high: num("high")?,
            }
        } else {
            ComplexityDist::Beta {
                alpha: num("alpha")?,
                beta: num("beta")?,
            }
        };
        Ok(dist)
    }

    fn finish(self) -> Result<()> {
        if let Some(t) = self.table {
            if let Some(key) = t.keys().find(|k| !self.seen.contains(&k.as_str())) {
                return Err(ConfigError::UnknownKey {
                    section: self.name.into(),
                    key: key.clone(),
                }
                .into());
            }
        }
        Ok(())
    }
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

const SECTIONS: [&str; 5] = [
    "perception",
    "policy",
    "cost_model",
    "simulation",
    "synthetic",
];

impl Config {
    /// Parses a config document. `base_dir` resolves `calibration_file`.
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let root: Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigError::Syntax {
                message: e.to_string(),
            })?;
        for key in root.keys() {
            if key != "schema" && !SECTIONS.contains(&key.as_str()) {
                return Err(ConfigError::UnknownKey {
                    section: "<root>".into(),
                    key: key.clone(),
                }
                .into());
            }
        }
        match root.get("schema") {
            None => {}
            Some(Value::Integer(SCHEMA_VERSION)) => {}
            Some(v) => {
                return Err(invalid(
                    "<root>",
                    "schema",
                    format!("unsupported schema version {v}"),
                ))
            }
        }
        let d = Config::default();
        Ok(Config {
            perception: parse_perception(&root, &d.perception, base_dir)?,
            policy: parse_policy(&root, &d.policy)?,
            cost_model: parse_cost_model(&root, &d.cost_model)?,
            simulation: parse_simulation(&root, &d.simulation)?,
            synthetic: parse_synthetic(&root, &d.synthetic)?,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base: PathBuf = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml_str(&text, &base)
    }

    /// Renders the full document with every key spelled out. Calibration is
    /// always written inline.
    pub fn to_toml_string(&self) -> String {
        let p = &self.perception;
        let c = &self.cost_model;
        let s = &self.simulation;
        let y = &self.synthetic;
        let mut o = String::new();
        let _ = writeln!(o, "schema = {SCHEMA_VERSION}\n");
        let _ = writeln!(o, "[perception]");
        let _ = writeln!(o, "h0 = {}\nw0 = {}", p.ref_height, p.ref_width);
        for (k, v) in [
            ("w_res", p.weights.res),
            ("w_edge", p.weights.edge),
            ("w_ent", p.weights.ent),
            ("w_lap", p.weights.lap),
        ] {
            let _ = writeln!(o, "{k} = {}", decimal(v));
        }
        let _ = writeln!(o, "l0 = {}", p.text.l0);
        for (k, v) in [
            ("gamma", p.text.gamma),
            ("beta_l", p.text.beta_l),
            ("beta_ner", p.text.beta_ner),
        ] {
            let _ = writeln!(o, "{k} = {}", decimal(v));
        }
        o.push_str(&p.calibration.to_document());

        let q = &self.policy;
        let _ = writeln!(o, "\n[policy]");
        for (k, v) in [
            ("tau_text", q.tau_text),
            ("tau_image", q.tau_image),
            ("ell_max", q.ell_max),
            ("beta_bw_mbps", q.beta_bw_mbps),
        ] {
            let _ = writeln!(o, "{k} = {}", decimal(v));
        }
        let _ = writeln!(o, "bandwidth_gate_literal = {}", q.bandwidth_gate_literal);

        let _ = writeln!(o, "\n[cost_model]");
        for (k, v) in [
            ("edge_base_s", c.edge_base_s),
            ("edge_slope_s", c.edge_slope_s),
            ("cloud_base_s", c.cloud_base_s),
            ("cloud_slope_s", c.cloud_slope_s),
            ("rtt_s", c.rtt_s),
            ("edge_acc_base", c.edge_acc_base),
            ("edge_acc_slope", c.edge_acc_slope),
            ("cloud_acc", c.cloud_acc),
            ("edge_mem_mb", c.edge_mem_mb),
            ("cloud_mem_mb", c.cloud_mem_mb),
        ] {
            let _ = writeln!(o, "{k} = {}", decimal(v));
        }
        let _ = writeln!(
            o,
            "edge_queue_cap = {}",
            c.edge_queue_cap.min(i64::MAX as u64)
        );

        let _ = writeln!(o, "\n[simulation]");
        let bws: Vec<String> = s.bandwidths_mbps.iter().map(|b| decimal(*b)).collect();
        let _ = writeln!(o, "bandwidths_mbps = [{}]", bws.join(", "));
        let _ = writeln!(o, "seed = {}", s.seed);
        let names: Vec<String> = s
            .strategies
            .iter()
            .map(|st| format!("\"{}\"", st.name()))
            .collect();
        let _ = writeln!(o, "strategies = [{}]", names.join(", "));
        let _ = writeln!(o, "uniform_threshold = {}", decimal(s.uniform_threshold));
        let _ = writeln!(
            o,
            "ablation_bandwidth_mbps = {}",
            decimal(s.ablation_bandwidth_mbps)
        );

        let _ = writeln!(o, "\n[synthetic]");
        let _ = writeln!(o, "request_count = {}", y.request_count);
        let _ = writeln!(o, "arrival_rate = {}", decimal(y.arrival_rate));
        let _ = writeln!(o, "seed = {}", y.seed);
        let dist = |d: &ComplexityDist| match *d {
            ComplexityDist::Uniform { low, high } => {
                format!(
                    "{{ dist = \"uniform\", low = {}, high = {} }}",
                    decimal(low),
                    decimal(high)
                )
            }
            ComplexityDist::Beta { alpha, beta } => {
                format!(
                    "{{ dist = \"beta\", alpha = {}, beta = {} }}",
                    decimal(alpha),
                    decimal(beta)
                )
            }
        };
        let _ = writeln!(o, "image_complexity = {}", dist(&y.image.complexity));
        let _ = writeln!(o, "text_complexity = {}", dist(&y.text.complexity));
        let _ = writeln!(
            o,
            "image_bytes = [{}, {}]",
            y.image.payload.min_bytes, y.image.payload.max_bytes
        );
        let _ = writeln!(
            o,
            "text_bytes = [{}, {}]",
            y.text.payload.min_bytes, y.text.payload.max_bytes
        );
        o
    }
}

fn parse_perception(
    root: &Table,
    d: &PerceptionConfig,
    base_dir: &Path,
) -> Result<PerceptionConfig> {
    let mut s = Section::new(root, "perception")?;
    let ref_height = s.positive_u64("h0", d.ref_height as u64)? as usize;
    let ref_width = s.positive_u64("w0", d.ref_width as u64)? as usize;
    let w = [
        s.non_negative("w_res", d.weights.res)?,
        s.non_negative("w_edge", d.weights.edge)?,
        s.non_negative("w_ent", d.weights.ent)?,
        s.non_negative("w_lap", d.weights.lap)?,
    ];
    let weights = ImageWeights::new(w[0], w[1], w[2], w[3])
        .map_err(|e| invalid("perception", "w_*", e.to_string()))?;
    let l0 = s.positive_u64("l0", d.text.l0)?;
    let gamma = s.positive("gamma", d.text.gamma)?;
    let beta_l = s.non_negative("beta_l", d.text.beta_l)?;
    let beta_ner = s.non_negative("beta_ner", d.text.beta_ner)?;
    let text = TextParams::new(l0, gamma, beta_l, beta_ner)
        .map_err(|e| invalid("perception", "beta_l/beta_ner", e.to_string()))?;

    const INLINE: [&str; 5] = ["grad_p5", "grad_p95", "lap_p5", "lap_p95", "epsilon"];
    let file = s.string("calibration_file")?;
    let calibration = if let Some(file) = file {
        if let Some(k) = INLINE.iter().find(|k| s.has(k)) {
            return Err(invalid(
                "perception",
                k,
                "cannot be combined with calibration_file",
            ));
        }
        Calibration::load(base_dir.join(&file)).map_err(|e| match e {
            Error::Io { source, .. } => ConfigError::Io {
                path: base_dir.join(&file),
                source,
            }
            .into(),
            other => invalid("perception", "calibration_file", other.to_string()),
        })?
    } else {
        let c = &d.calibration;
        let grad_p5 = s.non_negative("grad_p5", c.grad_p5)?;
        let grad_p95 = s.non_negative("grad_p95", c.grad_p95)?;
        let lap_p5 = s.non_negative("lap_p5", c.lap_p5)?;
        let lap_p95 = s.non_negative("lap_p95", c.lap_p95)?;
        let epsilon = s.positive("epsilon", c.epsilon)?;
        Calibration::new(grad_p5, grad_p95, lap_p5, lap_p95, epsilon)
            .map_err(|e| invalid("perception", "grad_p5..lap_p95", e.to_string()))?
    };
    for k in INLINE {
        s.seen.push(k);
    }
    s.finish()?;
    Ok(PerceptionConfig {
        ref_height,
        ref_width,
        weights,
        calibration,
        text,
    })
}

fn parse_policy(root: &Table, d: &PolicyConfig) -> Result<PolicyConfig> {
    let mut s = Section::new(root, "policy")?;
    let cfg = PolicyConfig {
        tau_text: s.f64_in("tau_text", d.tau_text, 0.0..=1.0)?,
        tau_image: s.f64_in("tau_image", d.tau_image, 0.0..=1.0)?,
        ell_max: s.f64_in("ell_max", d.ell_max, 0.0..=1.0)?,
        beta_bw_mbps: s.positive("beta_bw_mbps", d.beta_bw_mbps)?,
        bandwidth_gate_literal: s.bool("bandwidth_gate_literal", d.bandwidth_gate_literal)?,
    };
    s.finish()?;
    Ok(cfg)
}

fn parse_cost_model(root: &Table, d: &CostModel) -> Result<CostModel> {
    let mut s = Section::new(root, "cost_model")?;
    let m = CostModel {
        edge_base_s: s.non_negative("edge_base_s", d.edge_base_s)?,
        edge_slope_s: s.non_negative("edge_slope_s", d.edge_slope_s)?,
        cloud_base_s: s.non_negative("cloud_base_s", d.cloud_base_s)?,
        cloud_slope_s: s.non_negative("cloud_slope_s", d.cloud_slope_s)?,
        rtt_s: s.non_negative("rtt_s", d.rtt_s)?,
        edge_acc_base: s.f64_in("edge_acc_base", d.edge_acc_base, 0.0..=1.0)?,
        edge_acc_slope: s.non_negative("edge_acc_slope", d.edge_acc_slope)?,
        cloud_acc: s.f64_in("cloud_acc", d.cloud_acc, 0.0..=1.0)?,
        edge_mem_mb: s.non_negative("edge_mem_mb", d.edge_mem_mb)?,
        cloud_mem_mb: s.non_negative("cloud_mem_mb", d.cloud_mem_mb)?,
        edge_queue_cap: s.positive_u64("edge_queue_cap", d.edge_queue_cap)?,
    };
    s.finish()?;
    Ok(m)
}

fn parse_simulation(root: &Table, d: &SimulationConfig) -> Result<SimulationConfig> {
    let mut s = Section::new(root, "simulation")?;
    let bandwidths_mbps = match s.array("bandwidths_mbps")? {
        None => d.bandwidths_mbps.clone(),
        Some(items) => {
            let bws: Option<Vec<f64>> = items.iter().map(as_f64).collect();
            match bws {
                Some(b) if !b.is_empty() && b.iter().all(|x| x.is_finite() && *x > 0.0) => b,
                _ => {
                    return Err(s.err(
                        "bandwidths_mbps",
                        "expected a non-empty list of positive numbers",
                    ))
                }
            }
        }
    };
    let seed = s.u64("seed", d.seed)?;
    let uniform_threshold = s.f64_in("uniform_threshold", d.uniform_threshold, 0.0..=1.0)?;
    let strategies = match s.array("strategies")? {
        None => Strategy::all(uniform_threshold).to_vec(),
        Some(items) if !items.is_empty() => items
            .iter()
            .map(|v| {
                v.as_str()
                    .ok_or_else(|| s.err("strategies", "expected strategy names"))
                    .and_then(|name| {
                        Strategy::parse(name, uniform_threshold)
                            .map_err(|e| s.err("strategies", e.to_string()))
                    })
            })
            .collect::<Result<Vec<_>>>()?,
        Some(_) => return Err(s.err("strategies", "must not be empty")),
    };
    let ablation_bandwidth_mbps =
        s.positive("ablation_bandwidth_mbps", d.ablation_bandwidth_mbps)?;
    s.finish()?;
    Ok(SimulationConfig {
        bandwidths_mbps,
        seed,
        strategies,
        uniform_threshold,
        ablation_bandwidth_mbps,
    })
}

fn parse_synthetic(root: &Table, d: &SyntheticSpec) -> Result<SyntheticSpec> {
    let mut s = Section::new(root, "synthetic")?;
    let mut spec = SyntheticSpec {
        request_count: s.u64("request_count", d.request_count as u64)? as usize,
        arrival_rate: s.positive("arrival_rate", d.arrival_rate)?,
        seed: s.u64("seed", d.seed)?,
        ..*d
    };
    spec.image.complexity = s.complexity_dist("image_complexity", d.image.complexity)?;
    spec.text.complexity = s.complexity_dist("text_complexity", d.text.complexity)?;
    spec.image.payload = s.byte_range("image_bytes", d.image.payload)?;
    spec.text.payload = s.byte_range("text_bytes", d.text.payload)?;
    spec.validate()
        .map_err(|e| invalid("synthetic", "*_complexity", e.to_string()))?;
    s.finish()?;
    Ok(spec)
}
