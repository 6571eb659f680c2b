//! Discrete-event model of one edge device and an elastic cloud.
//!
//! The edge is a single FIFO server. The cloud has unlimited parallel
//! servers, reached over a link of fixed bandwidth plus a round-trip time.
//! At each request arrival the edge load is the number of resident edge tasks
//! (waiting or in service) over the queue capacity; that load and the link
//! bandwidth form the state snapshot the policy sees for the whole request.
//!
//! Correctness of each task is drawn from a SplitMix64 stream keyed by
//! `(seed, request id)`, one draw per task whatever its route, so strategies
//! are compared on common random numbers.

mod report;
mod rng;

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perception::percentile_sorted;
use crate::policy::{
    check_complexity, decide_request, Decision, Modality, PolicyConfig, SystemState,
};

pub use report::{summary_table, to_csv, SimMetrics, SimReport, CSV_HEADER};
pub use rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModalityTask {
    pub modality: Modality,
    pub complexity: f64,
    pub payload_bytes: u64,
}

impl ModalityTask {
    pub fn new(modality: Modality, complexity: f64, payload_bytes: u64) -> Result<Self> {
        check_complexity(complexity)?;
        Ok(Self {
            modality,
            complexity,
            payload_bytes,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: u64,
    pub arrival_time: f64,
    pub tasks: Vec<ModalityTask>,
}

/// Service-time, accuracy and footprint model of the two devices.
///
/// Edge service is `edge_base_s + edge_slope_s * c`; cloud completion is
/// upload + `rtt_s` + `cloud_base_s + cloud_slope_s * c`. Edge accuracy is
/// `clip(edge_acc_base - edge_acc_slope * c, 0, 1)`, cloud accuracy is flat.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub edge_base_s: f64,
    pub edge_slope_s: f64,
    pub cloud_base_s: f64,
    pub cloud_slope_s: f64,
    pub rtt_s: f64,
    pub edge_acc_base: f64,
    pub edge_acc_slope: f64,
    pub cloud_acc: f64,
    pub edge_mem_mb: f64,
    pub cloud_mem_mb: f64,
    pub edge_queue_cap: u64,
}

impl Default for CostModel {
    fn default() -> Self {
        Self {
            edge_base_s: 0.01,
            edge_slope_s: 0.20,
            cloud_base_s: 0.03,
            cloud_slope_s: 0.10,
            rtt_s: 0.02,
            edge_acc_base: 0.90,
            edge_acc_slope: 0.45,
            cloud_acc: 0.77,
            edge_mem_mb: 4500.0,
            cloud_mem_mb: 16600.0,
            edge_queue_cap: 8,
        }
    }
}

impl CostModel {
    pub const UNBOUNDED_QUEUE: u64 = u64::MAX;

    pub fn validate(&self) -> Result<()> {
        let non_negative = [
            ("edge_base_s", self.edge_base_s),
            ("edge_slope_s", self.edge_slope_s),
            ("cloud_base_s", self.cloud_base_s),
            ("cloud_slope_s", self.cloud_slope_s),
            ("rtt_s", self.rtt_s),
            ("edge_acc_slope", self.edge_acc_slope),
            ("edge_mem_mb", self.edge_mem_mb),
            ("cloud_mem_mb", self.cloud_mem_mb),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::domain(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        if !self.edge_acc_base.is_finite() {
            return Err(Error::domain("edge_acc_base must be finite"));
        }
        if !(0.0..=1.0).contains(&self.cloud_acc) {
            return Err(Error::domain(format!(
                "cloud_acc must be in [0, 1], got {}",
                self.cloud_acc
            )));
        }
        if self.edge_queue_cap == 0 {
            return Err(Error::domain("edge_queue_cap must be at least 1"));
        }
        Ok(())
    }

    pub fn edge_accuracy(&self, c: f64) -> f64 {
        (self.edge_acc_base - self.edge_acc_slope * c).clamp(0.0, 1.0)
    }

    pub fn cloud_compute_s(&self, c: f64) -> f64 {
        self.cloud_base_s + self.cloud_slope_s * c
    }
}

pub fn edge_service_time(task: &ModalityTask, model: &CostModel) -> f64 {
    model.edge_base_s + model.edge_slope_s * task.complexity
}

pub fn upload_time(payload_bytes: u64, bandwidth_mbps: f64) -> f64 {
    payload_bytes as f64 * 8.0 / (bandwidth_mbps * 1e6)
}

/// Upload + round trip + cloud compute. The response payload is ignored.
pub fn cloud_total_time(task: &ModalityTask, bandwidth_mbps: f64, model: &CostModel) -> f64 {
    upload_time(task.payload_bytes, bandwidth_mbps)
        + model.rtt_s
        + model.cloud_compute_s(task.complexity)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Strategy {
    MoaOff,
    EdgeOnly,
    CloudOnly,
    /// Modality-blind baseline: the whole request goes to the cloud iff its
    /// mean task complexity exceeds `threshold`.
    UniformOffload {
        threshold: f64,
    },
}

impl Strategy {
    pub const NAMES: [&'static str; 4] = ["moa-off", "edge-only", "cloud-only", "uniform-offload"];

    /// All four strategies in report order.
    pub fn all(uniform_threshold: f64) -> [Strategy; 4] {
        [
            Strategy::MoaOff,
            Strategy::EdgeOnly,
            Strategy::CloudOnly,
            Strategy::UniformOffload {
                threshold: uniform_threshold,
            },
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::MoaOff => "moa-off",
            Strategy::EdgeOnly => "edge-only",
            Strategy::CloudOnly => "cloud-only",
            Strategy::UniformOffload { .. } => "uniform-offload",
        }
    }

    pub fn parse(name: &str, uniform_threshold: f64) -> Result<Self> {
        match name {
            "moa-off" => Ok(Strategy::MoaOff),
            "edge-only" => Ok(Strategy::EdgeOnly),
            "cloud-only" => Ok(Strategy::CloudOnly),
            "uniform-offload" => Ok(Strategy::UniformOffload {
                threshold: uniform_threshold,
            }),
            other => Err(Error::domain(format!(
                "unknown strategy `{other}` (expected one of {})",
                Strategy::NAMES.join(", ")
            ))),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Routing rules, including the ablation variants that are not public
/// strategies.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Routing {
    MoaOff,
    EdgeOnly,
    CloudOnly,
    Uniform(f64),
    /// Every task is routed as if its complexity were the request mean.
    ModalityBlind,
    /// Thresholds only; load and bandwidth gates ignored.
    SchedulingOff,
}

impl Routing {
    fn label(self) -> &'static str {
        match self {
            Routing::MoaOff => "moa-off",
            Routing::EdgeOnly => "edge-only",
            Routing::CloudOnly => "cloud-only",
            Routing::Uniform(_) => "uniform-offload",
            Routing::ModalityBlind => "modality-blind",
            Routing::SchedulingOff => "scheduling-off",
        }
    }

    /// EdgeOnly has nowhere to spill, so it queues without bound.
    fn respects_queue_cap(self) -> bool {
        self != Routing::EdgeOnly
    }

    fn route(
        self,
        req: &Request,
        state: &SystemState,
        cfg: &PolicyConfig,
    ) -> Result<Vec<Decision>> {
        let mean = || req.tasks.iter().map(|t| t.complexity).sum::<f64>() / req.tasks.len() as f64;
        let decisions = match self {
            Routing::EdgeOnly => vec![Decision::Edge; req.tasks.len()],
            Routing::CloudOnly => vec![Decision::Cloud; req.tasks.len()],
            Routing::Uniform(threshold) => {
                let d = if mean() > threshold {
                    Decision::Cloud
                } else {
                    Decision::Edge
                };
                vec![d; req.tasks.len()]
            }
            Routing::MoaOff => {
                let scores: Vec<_> = req
                    .tasks
                    .iter()
                    .map(|t| (t.modality, t.complexity))
                    .collect();
                decide_request(&scores, state, cfg)?.decisions().collect()
            }
            Routing::ModalityBlind => {
                let m = mean().clamp(0.0, 1.0);
                let scores: Vec<_> = req.tasks.iter().map(|t| (t.modality, m)).collect();
                decide_request(&scores, state, cfg)?.decisions().collect()
            }
            Routing::SchedulingOff => req
                .tasks
                .iter()
                .map(|t| {
                    if t.complexity <= cfg.threshold(t.modality) {
                        Decision::Edge
                    } else {
                        Decision::Cloud
                    }
                })
                .collect(),
        };
        Ok(decisions)
    }
}

impl From<Strategy> for Routing {
    fn from(s: Strategy) -> Self {
        match s {
            Strategy::MoaOff => Routing::MoaOff,
            Strategy::EdgeOnly => Routing::EdgeOnly,
            Strategy::CloudOnly => Routing::CloudOnly,
            Strategy::UniformOffload { threshold } => Routing::Uniform(threshold),
        }
    }
}

/// Where and when one task ran.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TaskOutcome {
    pub target: Decision,
    pub spilled: bool,
    /// Compute time on the executing device.
    pub service_s: f64,
    pub completion_time: f64,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RequestOutcome {
    pub id: u64,
    pub latency_s: f64,
    pub correct: bool,
    pub tasks: Vec<TaskOutcome>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum EventKind {
    EdgeDone { req: usize, task: usize },
    CloudDone { req: usize, task: usize },
    Arrival { req: usize },
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    seq: u64,
    kind: EventKind,
}

impl Event {
    /// Completions at time t are processed before arrivals at t.
    fn rank(&self) -> u8 {
        match self.kind {
            EventKind::Arrival { .. } => 1,
            _ => 0,
        }
    }

    fn key_cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.rank().cmp(&other.rank()))
            .then(self.seq.cmp(&other.seq))
    }
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.key_cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other.key_cmp(self)
    }
}

#[derive(Default)]
struct EventQueue {
    heap: BinaryHeap<Event>,
    seq: u64,
}

impl EventQueue {
    fn push(&mut self, time: f64, kind: EventKind) {
        self.seq += 1;
        self.heap.push(Event {
            time,
            seq: self.seq,
            kind,
        });
    }

    fn pop(&mut self) -> Option<Event> {
        self.heap.pop()
    }
}

fn validate_inputs(
    workload: &[Request],
    cfg: &PolicyConfig,
    model: &CostModel,
    bandwidth_mbps: f64,
) -> Result<()> {
    cfg.validate()?;
    model.validate()?;
    if !(bandwidth_mbps.is_finite() && bandwidth_mbps > 0.0) {
        return Err(Error::domain(format!(
            "bandwidth must be positive, got {bandwidth_mbps}"
        )));
    }
    if workload.is_empty() {
        return Err(Error::domain("workload is empty"));
    }
    let mut prev = 0.0;
    for req in workload {
        if !(req.arrival_time.is_finite() && req.arrival_time >= 0.0) {
            return Err(Error::domain(format!(
                "request {}: arrival time must be finite and >= 0",
                req.id
            )));
        }
        if req.arrival_time < prev {
            return Err(Error::domain(format!(
                "workload not sorted by arrival time at request {}",
                req.id
            )));
        }
        prev = req.arrival_time;
        if req.tasks.is_empty() {
            return Err(Error::domain(format!("request {} has no tasks", req.id)));
        }
        for t in &req.tasks {
            check_complexity(t.complexity)?;
        }
    }
    Ok(())
}

struct Run<'a> {
    workload: &'a [Request],
    routing: Routing,
    cfg: &'a PolicyConfig,
    model: &'a CostModel,
    bandwidth_mbps: f64,
    seed: u64,
}

impl Run<'_> {
    fn execute(&self) -> Result<(SimReport, Vec<RequestOutcome>)> {
        validate_inputs(self.workload, self.cfg, self.model, self.bandwidth_mbps)?;
        let model = self.model;
        let cap = model.edge_queue_cap;

        let mut outcomes: Vec<RequestOutcome> = Vec::with_capacity(self.workload.len());
        let mut pending: Vec<usize> = Vec::with_capacity(self.workload.len());
        let mut events = EventQueue::default();

        let mut edge_free_at = 0.0f64;
        let mut edge_resident = 0u64;
        let mut cloud_resident = 0u64;
        let mut peak_edge = 0u64;
        let mut peak_cloud = 0u64;
        let mut edge_busy = 0.0;
        let mut cloud_busy = 0.0;
        let mut bytes_uploaded = 0u64;
        let mut spills = 0u64;
        let mut offloaded = 0usize;
        let mut tasks_total = 0usize;

        events.push(self.workload[0].arrival_time, EventKind::Arrival { req: 0 });

        while let Some(ev) = events.pop() {
            let now = ev.time;
            match ev.kind {
                EventKind::Arrival { req: idx } => {
                    if let Some(next) = self.workload.get(idx + 1) {
                        events.push(next.arrival_time, EventKind::Arrival { req: idx + 1 });
                    }
                    let req = &self.workload[idx];
                    let load = if cap == CostModel::UNBOUNDED_QUEUE {
                        0.0
                    } else {
                        (edge_resident as f64 / cap as f64).min(1.0)
                    };
                    let state = SystemState::new(load, self.bandwidth_mbps)?;
                    let decisions = self.routing.route(req, &state, self.cfg)?;
                    let mut draws = SplitMix64::for_stream(self.seed, req.id);

                    let mut tasks = Vec::with_capacity(req.tasks.len());
                    for (t_idx, (task, mut target)) in req.tasks.iter().zip(decisions).enumerate() {
                        let mut spilled = false;
                        if target == Decision::Edge
                            && self.routing.respects_queue_cap()
                            && edge_resident >= cap
                        {
                            target = Decision::Cloud;
                            spilled = true;
                            spills += 1;
                        }
                        let (service_s, completion, accuracy) = match target {
                            Decision::Edge => {
                                let s = edge_service_time(task, model);
                                let finish = now.max(edge_free_at) + s;
                                edge_free_at = finish;
                                edge_resident += 1;
                                peak_edge = peak_edge.max(edge_resident);
                                edge_busy += s;
                                events.push(
                                    finish,
                                    EventKind::EdgeDone {
                                        req: idx,
                                        task: t_idx,
                                    },
                                );
                                (s, finish, model.edge_accuracy(task.complexity))
                            }
                            Decision::Cloud => {
                                let s = model.cloud_compute_s(task.complexity);
                                let finish =
                                    now + cloud_total_time(task, self.bandwidth_mbps, model);
                                cloud_resident += 1;
                                peak_cloud = peak_cloud.max(cloud_resident);
                                cloud_busy += s;
                                bytes_uploaded += task.payload_bytes;
                                offloaded += 1;
                                events.push(
                                    finish,
                                    EventKind::CloudDone {
                                        req: idx,
                                        task: t_idx,
                                    },
                                );
                                (s, finish, model.cloud_acc)
                            }
                        };
                        tasks.push(TaskOutcome {
                            target,
                            spilled,
                            service_s,
                            completion_time: completion,
                            correct: draws.next_f64() < accuracy,
                        });
                    }
                    tasks_total += tasks.len();
                    pending.push(tasks.len());
                    outcomes.push(RequestOutcome {
                        id: req.id,
                        latency_s: 0.0,
                        correct: tasks.iter().all(|t| t.correct),
                        tasks,
                    });
                }
                EventKind::EdgeDone { req, task } | EventKind::CloudDone { req, task } => {
                    if matches!(ev.kind, EventKind::EdgeDone { .. }) {
                        edge_resident -= 1;
                    } else {
                        cloud_resident -= 1;
                    }
                    debug_assert_eq!(outcomes[req].tasks[task].completion_time, now);
                    pending[req] -= 1;
                    if pending[req] == 0 {
                        // events arrive in time order, so this is the latest task
                        outcomes[req].latency_s = now - self.workload[req].arrival_time;
                    }
                }
            }
        }

        let latencies: Vec<f64> = outcomes.iter().map(|o| o.latency_s).collect();
        let mut sorted = latencies.clone();
        sorted.sort_by(f64::total_cmp);
        let n = latencies.len() as f64;
        let metrics = SimMetrics {
            requests: outcomes.len(),
            tasks: tasks_total,
            mean_s: latencies.iter().sum::<f64>() / n,
            p50_s: percentile_sorted(&sorted, 50.0),
            p95_s: percentile_sorted(&sorted, 95.0),
            p99_s: percentile_sorted(&sorted, 99.0),
            acc_proxy: outcomes.iter().filter(|o| o.correct).count() as f64 / n,
            frac_offloaded: offloaded as f64 / tasks_total as f64,
            edge_busy_s: edge_busy,
            cloud_busy_s: cloud_busy,
            bytes_uploaded,
            peak_edge_mem_mb: if peak_edge > 0 {
                model.edge_mem_mb
            } else {
                0.0
            },
            peak_cloud_mem_mb: if peak_cloud > 0 {
                model.cloud_mem_mb
            } else {
                0.0
            },
            edge_spills: spills,
        };
        let report = SimReport {
            strategy: self.routing.label().to_string(),
            bandwidth_mbps: self.bandwidth_mbps,
            metrics,
        };
        Ok((report, outcomes))
    }
}

/// Runs one strategy over a workload sorted by arrival time.
pub fn simulate(
    workload: &[Request],
    strategy: Strategy,
    cfg: &PolicyConfig,
    model: &CostModel,
    bandwidth_mbps: f64,
    seed: u64,
) -> Result<SimReport> {
    simulate_detailed(workload, strategy, cfg, model, bandwidth_mbps, seed).map(|(r, _)| r)
}

/// Like [`simulate`], also returning the per-request outcomes in arrival
/// order.
pub fn simulate_detailed(
    workload: &[Request],
    strategy: Strategy,
    cfg: &PolicyConfig,
    model: &CostModel,
    bandwidth_mbps: f64,
    seed: u64,
) -> Result<(SimReport, Vec<RequestOutcome>)> {
    Run {
        workload,
        routing: strategy.into(),
        cfg,
        model,
        bandwidth_mbps,
        seed,
    }
    .execute()
}

/// Every strategy at every bandwidth. Reports are bandwidth-major, then in
/// the order of `strategies`.
pub fn run_comparison(
    workload: &[Request],
    cfg: &PolicyConfig,
    model: &CostModel,
    bandwidths: &[f64],
    strategies: &[Strategy],
    seed: u64,
) -> Result<Vec<SimReport>> {
    let cells: Vec<(f64, Strategy)> = bandwidths
        .iter()
        .flat_map(|&bw| strategies.iter().map(move |&s| (bw, s)))
        .collect();
    cells
        .into_par_iter()
        .map(|(bw, s)| simulate(workload, s, cfg, model, bw, seed))
        .collect()
}

/// Variant minus full, for each tracked metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AblationDelta {
    pub acc_proxy: f64,
    pub mean_s: f64,
    pub p95_s: f64,
    pub edge_busy_s: f64,
    pub cloud_busy_s: f64,
}

impl AblationDelta {
    fn between(full: &SimMetrics, variant: &SimMetrics) -> Self {
        Self {
            acc_proxy: variant.acc_proxy - full.acc_proxy,
            mean_s: variant.mean_s - full.mean_s,
            p95_s: variant.p95_s - full.p95_s,
            edge_busy_s: variant.edge_busy_s - full.edge_busy_s,
            cloud_busy_s: variant.cloud_busy_s - full.cloud_busy_s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationReport {
    pub full: SimReport,
    /// Each task routed on its request's mean complexity.
    pub modality_blind: SimReport,
    /// Thresholds only, load and bandwidth gates ignored.
    pub scheduling_off: SimReport,
}

impl AblationReport {
    pub fn modality_blind_delta(&self) -> AblationDelta {
        AblationDelta::between(&self.full.metrics, &self.modality_blind.metrics)
    }

    pub fn scheduling_off_delta(&self) -> AblationDelta {
        AblationDelta::between(&self.full.metrics, &self.scheduling_off.metrics)
    }

    /// `#`-prefixed header explaining the sign convention, then CSV rows.
    pub fn to_text(&self) -> String {
        let mut out = String::from(
            "# ablation of moa-off; delta columns are variant minus full moa-off\n\
             # d_acc < 0: variant less accurate; d_mean_s/d_p95_s > 0: variant slower;\n\
             # d_edge_busy_s/d_cloud_busy_s > 0: variant spends more compute on that device\n\
             variant,bandwidth_mbps,acc_proxy,mean_s,p95_s,edge_busy_s,cloud_busy_s,d_acc,d_mean_s,d_p95_s,d_edge_busy_s,d_cloud_busy_s\n",
        );
        let zero = AblationDelta::between(&self.full.metrics, &self.full.metrics);
        for (r, d) in [
            (&self.full, zero),
            (&self.modality_blind, self.modality_blind_delta()),
            (&self.scheduling_off, self.scheduling_off_delta()),
        ] {
            let m = &r.metrics;
            out.push_str(&format!(
                "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
                r.strategy,
                r.bandwidth_mbps,
                m.acc_proxy,
                m.mean_s,
                m.p95_s,
                m.edge_busy_s,
                m.cloud_busy_s,
                d.acc_proxy,
                d.mean_s,
                d.p95_s,
                d.edge_busy_s,
                d.cloud_busy_s
            ));
        }
        out
    }
}

pub fn ablation(
    workload: &[Request],
    cfg: &PolicyConfig,
    model: &CostModel,
    bandwidth_mbps: f64,
    seed: u64,
) -> Result<AblationReport> {
    let run = |routing| {
        Run {
            workload,
            routing,
            cfg,
            model,
            bandwidth_mbps,
            seed,
        }
        .execute()
        .map(|(r, _)| r)
    };
    Ok(AblationReport {
        full: run(Routing::MoaOff)?,
        modality_blind: run(Routing::ModalityBlind)?,
        scheduling_off: run(Routing::SchedulingOff)?,
    })
}
