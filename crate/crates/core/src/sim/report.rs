use std::fmt::Write as _;

use serde::Serialize;

/// Column order of the comparison CSV.
pub const CSV_HEADER: &str =
    "strategy,bandwidth_mbps,mean_s,p50_s,p95_s,p99_s,acc_proxy,frac_offloaded,\
edge_busy_s,cloud_busy_s,bytes_uploaded,peak_edge_mem_mb,peak_cloud_mem_mb,edge_spills";

/// Aggregate outcome of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimMetrics {
    pub requests: usize,
    pub tasks: usize,
    pub mean_s: f64,
    pub p50_s: f64,
    pub p95_s: f64,
    pub p99_s: f64,
    /// Fraction of requests whose every task was scored correct.
    pub acc_proxy: f64,
    /// Fraction of tasks executed in the cloud, spills included.
    pub frac_offloaded: f64,
    pub edge_busy_s: f64,
    pub cloud_busy_s: f64,
    pub bytes_uploaded: u64,
    pub peak_edge_mem_mb: f64,
    pub peak_cloud_mem_mb: f64,
    pub edge_spills: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub strategy: String,
    pub bandwidth_mbps: f64,
    pub metrics: SimMetrics,
}

impl SimReport {
    pub fn csv_row(&self) -> String {
        let m = &self.metrics;
        format!(
            "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{},{:.1},{:.1},{}",
            self.strategy,
            self.bandwidth_mbps,
            m.mean_s,
            m.p50_s,
            m.p95_s,
            m.p99_s,
            m.acc_proxy,
            m.frac_offloaded,
            m.edge_busy_s,
            m.cloud_busy_s,
            m.bytes_uploaded,
            m.peak_edge_mem_mb,
            m.peak_cloud_mem_mb,
            m.edge_spills,
        )
    }
}

pub fn to_csv(reports: &[SimReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Fixed-width table for terminals.
pub fn summary_table(reports: &[SimReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<16} {:>8} {:>9} {:>9} {:>9} {:>8} {:>8} {:>11} {:>11} {:>7}",
        "strategy",
        "bw_mbps",
        "mean_s",
        "p95_s",
        "p99_s",
        "acc",
        "offload",
        "edge_busy",
        "cloud_busy",
        "spills"
    );
    for r in reports {
        let m = &r.metrics;
        let _ = writeln!(
            out,
            "{:<16} {:>8} {:>9.4} {:>9.4} {:>9.4} {:>8.4} {:>8.4} {:>11.2} {:>11.2} {:>7}",
            r.strategy,
            r.bandwidth_mbps,
            m.mean_s,
            m.p95_s,
            m.p99_s,
            m.acc_proxy,
            m.frac_offloaded,
            m.edge_busy_s,
            m.cloud_busy_s,
            m.edge_spills
        );
    }
    out
}
