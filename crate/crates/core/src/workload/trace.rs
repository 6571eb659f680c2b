//! Line-delimited JSON workload traces.
//!
//! One record per line:
//! `{"id": 3, "t": 0.25, "mods": [{"kind": "image", "path": "a.pgm"}, {"kind": "text", "content": "..."}]}`.
//! Entries carrying `c` are pre-scored and skip perception. Otherwise text
//! entries need `content` and image entries need `path`, resolved against the
//! trace file's directory. `bytes` defaults to the UTF-8 length of the text
//! or the on-disk size of the image (0 for pre-scored entries).

use std::collections::HashSet;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::pnm;
use crate::error::{Error, Result, WorkloadError};
use crate::perception::PerceptionConfig;
use crate::policy::Modality;
use crate::sim::{ModalityTask, Request};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    id: u64,
    t: f64,
    mods: Vec<Entry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Entry {
    kind: Modality,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    content: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bytes: Option<u64>,
}

fn malformed(line: usize, reason: impl Into<String>) -> Error {
    WorkloadError::Malformed {
        line,
        reason: reason.into(),
    }
    .into()
}

fn score_entry(
    entry: &Entry,
    line: usize,
    base_dir: &Path,
    cfg: &PerceptionConfig,
) -> Result<ModalityTask> {
    if let Some(c) = entry.c {
        if !(0.0..=1.0).contains(&c) {
            return Err(malformed(line, format!("complexity {c} outside [0, 1]")));
        }
        return ModalityTask::new(entry.kind, c, entry.bytes.unwrap_or(0));
    }
    match entry.kind {
        Modality::Text => {
            let content = entry
                .content
                .as_deref()
                .ok_or_else(|| malformed(line, "text entry needs `content` or `c`"))?;
            let score = cfg.score_text(content);
            let bytes = entry.bytes.unwrap_or(content.len() as u64);
            ModalityTask::new(Modality::Text, score.total, bytes)
        }
        Modality::Image => {
            let rel = entry
                .path
                .as_deref()
                .ok_or_else(|| malformed(line, "image entry needs `path` or `c`"))?;
            let path = base_dir.join(rel);
            let data = std::fs::read(&path).map_err(|source| WorkloadError::MissingImage {
                line,
                path: path.clone(),
                source,
            })?;
            let img = pnm::decode_gray(&data).map_err(|source| WorkloadError::BadImage {
                line,
                path: path.clone(),
                source,
            })?;
            let score = cfg.score_image(&img);
            let bytes = entry.bytes.unwrap_or(data.len() as u64);
            ModalityTask::new(Modality::Image, score.total, bytes)
        }
    }
}

/// Parses a trace from a reader. Image paths resolve against `base_dir`.
pub fn parse_workload(
    reader: impl BufRead,
    base_dir: &Path,
    cfg: &PerceptionConfig,
) -> Result<Vec<Request>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| malformed(line_no, format!("read error: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record =
            serde_json::from_str(&line).map_err(|e| malformed(line_no, e.to_string()))?;
        if !(rec.t.is_finite() && rec.t >= 0.0) {
            return Err(malformed(
                line_no,
                format!("arrival time {} must be finite and >= 0", rec.t),
            ));
        }
        if rec.mods.is_empty() {
            return Err(malformed(line_no, "record has no modality entries"));
        }
        if !seen.insert(rec.id) {
            return Err(malformed(
                line_no,
                format!("duplicate request id {}", rec.id),
            ));
        }
        let tasks = rec
            .mods
            .iter()
            .map(|e| score_entry(e, line_no, base_dir, cfg))
            .collect::<Result<Vec<_>>>()?;
        out.push(Request {
            id: rec.id,
            arrival_time: rec.t,
            tasks,
        });
    }
    // stable: equal arrival times keep file order
    out.sort_by(|a, b| a.arrival_time.total_cmp(&b.arrival_time));
    Ok(out)
}

pub fn load_workload(path: impl AsRef<Path>, cfg: &PerceptionConfig) -> Result<Vec<Request>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let base: PathBuf = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_workload(std::io::BufReader::new(file), &base, cfg)
}

/// Serializes requests as pre-scored trace lines.
pub fn workload_to_jsonl(requests: &[Request]) -> String {
    let mut out = String::new();
    for r in requests {
        let rec = Record {
            id: r.id,
            t: r.arrival_time,
            mods: r
                .tasks
                .iter()
                .map(|t| Entry {
                    kind: t.modality,
                    content: None,
                    path: None,
                    c: Some(t.complexity),
                    bytes: Some(t.payload_bytes),
                })
                .collect(),
        };
        out.push_str(&serde_json::to_string(&rec).expect("plain data serializes"));
        out.push('\n');
    }
    out
}
