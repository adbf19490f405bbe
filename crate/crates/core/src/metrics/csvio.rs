//! CSV artifacts: per-sample series, per-stream summaries and resource use.

use std::fs::{self, File};
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::latency::{LatencySample, StreamSummary};
use super::resources::{ResourceSample, ResourceUsage};
use crate::streams::{Protocol, StreamLabel};

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("{path}: line {line}: {message}")]
    Invalid { path: String, line: u64, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CsvError + '_ {
    move |source| CsvError::Io { path: path.display().to_string(), source }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CsvError + '_ {
    move |source| CsvError::Csv { path: path.display().to_string(), source }
}

#[derive(Serialize, Deserialize)]
struct SampleRow {
    stream: String,
    seq: u64,
    receipt_ns: u64,
    inter_arrival_ms: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct SummaryRow {
    protocol: String,
    stream: String,
    packets_count: u64,
    mean_ms: f64,
    min_ms: f64,
    max_ms: f64,
}

#[derive(Serialize, Deserialize)]
struct ResourceRow {
    label: String,
    pid: i32,
    t_ns: u64,
    cpu_percent: f64,
    mem_percent: f64,
    partial: bool,
}

#[derive(Serialize, Deserialize)]
struct UsageRow {
    protocol: String,
    label: String,
    mean_cpu_percent: f64,
    mean_mem_percent: f64,
    samples: usize,
    multi_core: bool,
}

fn writer(path: &Path) -> Result<csv::Writer<File>, CsvError> {
    let file = File::create(path).map_err(io_err(path))?;
    Ok(csv::Writer::from_writer(file))
}

fn rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CsvError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut rd = csv::Reader::from_reader(file);
    rd.deserialize()
        .map(|r| {
            r.map_err(|e| {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                CsvError::Invalid { path: path.display().to_string(), line, message: e.to_string() }
            })
        })
        .collect()
}

fn parse_label(path: &Path, line: u64, s: &str) -> Result<StreamLabel, CsvError> {
    s.parse().map_err(|_| CsvError::Invalid {
        path: path.display().to_string(),
        line,
        message: format!("unknown stream '{s}'"),
    })
}

/// Columns: stream, seq, receipt_ns, inter_arrival_ms (empty on the first
/// sample of a stream).
pub fn write_samples(path: &Path, samples: &[LatencySample]) -> Result<(), CsvError> {
    let mut w = writer(path)?;
    for s in samples {
        w.serialize(SampleRow {
            stream: s.stream.as_str().into(),
            seq: s.seq,
            receipt_ns: s.receipt_ns,
            inter_arrival_ms: s.inter_arrival_ms,
        })
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_samples(path: &Path) -> Result<Vec<LatencySample>, CsvError> {
    rows::<SampleRow>(path)?
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            Ok(LatencySample {
                stream: parse_label(path, i as u64 + 2, &r.stream)?,
                seq: r.seq,
                receipt_ns: r.receipt_ns,
                inter_arrival_ms: r.inter_arrival_ms,
            })
        })
        .collect()
}

/// One row per protocol and stream, in the column order of the latency
/// tables: packets count, mean, min, max.
pub fn write_summary(path: &Path, rows_in: &[(Protocol, StreamSummary)]) -> Result<(), CsvError> {
    let mut w = writer(path)?;
    for (p, s) in rows_in {
        w.serialize(SummaryRow {
            protocol: p.as_str().into(),
            stream: s.stream.as_str().into(),
            packets_count: s.packets_count,
            mean_ms: s.mean_ms,
            min_ms: s.min_ms,
            max_ms: s.max_ms,
        })
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_summary(path: &Path) -> Result<Vec<(Protocol, StreamSummary)>, CsvError> {
    rows::<SummaryRow>(path)?
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let line = i as u64 + 2;
            let protocol = r.protocol.parse().map_err(|_| CsvError::Invalid {
                path: path.display().to_string(),
                line,
                message: format!("unknown protocol '{}'", r.protocol),
            })?;
            Ok((
                protocol,
                StreamSummary {
                    stream: parse_label(path, line, &r.stream)?,
                    packets_count: r.packets_count,
                    mean_ms: r.mean_ms,
                    min_ms: r.min_ms,
                    max_ms: r.max_ms,
                },
            ))
        })
        .collect()
}

pub fn write_resource_samples(path: &Path, samples: &[ResourceSample]) -> Result<(), CsvError> {
    let mut w = writer(path)?;
    for s in samples {
        w.serialize(ResourceRow {
            label: s.label.clone(),
            pid: s.pid,
            t_ns: s.t_ns,
            cpu_percent: s.cpu_percent,
            mem_percent: s.mem_percent,
            partial: s.partial,
        })
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_resource_samples(path: &Path) -> Result<Vec<ResourceSample>, CsvError> {
    Ok(rows::<ResourceRow>(path)?
        .into_iter()
        .map(|r| ResourceSample {
            label: r.label,
            pid: r.pid,
            t_ns: r.t_ns,
            cpu_percent: r.cpu_percent,
            mem_percent: r.mem_percent,
            partial: r.partial,
        })
        .collect())
}

pub fn write_usage(path: &Path, rows_in: &[(Protocol, ResourceUsage)]) -> Result<(), CsvError> {
    let mut w = writer(path)?;
    for (p, u) in rows_in {
        w.serialize(UsageRow {
            protocol: p.as_str().into(),
            label: u.label.clone(),
            mean_cpu_percent: u.cpu_percent,
            mean_mem_percent: u.mem_percent,
            samples: u.samples,
            multi_core: u.multi_core,
        })
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_usage(path: &Path) -> Result<Vec<(Protocol, ResourceUsage)>, CsvError> {
    rows::<UsageRow>(path)?
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let protocol = r.protocol.parse().map_err(|_| CsvError::Invalid {
                path: path.display().to_string(),
                line: i as u64 + 2,
                message: format!("unknown protocol '{}'", r.protocol),
            })?;
            Ok((
                protocol,
                ResourceUsage {
                    label: r.label,
                    cpu_percent: r.mean_cpu_percent,
                    mem_percent: r.mean_mem_percent,
                    samples: r.samples,
                    multi_core: r.multi_core,
                },
            ))
        })
        .collect()
}

/// Fails early if `dir` cannot be created or written.
pub fn preflight_output_dir(dir: &Path) -> Result<(), CsvError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let probe = dir.join(".write-probe");
    fs::write(&probe, b"ok").map_err(io_err(dir))?;
    fs::remove_file(&probe).map_err(io_err(dir))
}
