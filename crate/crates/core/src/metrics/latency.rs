use std::collections::BTreeMap;
use std::sync::mpsc::Receiver;

use crate::streams::{ReceivedSample, StreamLabel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencySample {
    pub stream: StreamLabel,
    pub seq: u64,
    /// Monotonic receive time at the consumer.
    pub receipt_ns: u64,
    /// Delta to the previous sample of the same stream; `None` for the first.
    pub inter_arrival_ms: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamSummary {
    pub stream: StreamLabel,
    pub packets_count: u64,
    pub mean_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SummaryError {
    #[error("insufficient data: {0} sample(s), at least 2 required")]
    InsufficientData(usize),
    #[error("sample {0} has no inter-arrival delta")]
    MissingDelta(usize),
}

fn ns_to_ms(ns: u64) -> f64 {
    ns as f64 / 1e6
}

/// Builds samples from a stream's receive times, deriving each delta.
pub fn samples_from_receipts(stream: StreamLabel, receipts: &[u64]) -> Vec<LatencySample> {
    let mut prev = None;
    receipts
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let inter_arrival_ms = prev.map(|p: u64| ns_to_ms(t.saturating_sub(p)));
            prev = Some(t);
            LatencySample { stream, seq: i as u64, receipt_ns: t, inter_arrival_ms }
        })
        .collect()
}

/// Mean, minimum and maximum of the inter-arrival deltas of one stream.
/// The count is the number of samples, one more than the number of deltas.
pub fn summarize(samples: &[LatencySample]) -> Result<StreamSummary, SummaryError> {
    if samples.len() < 2 {
        return Err(SummaryError::InsufficientData(samples.len()));
    }
    let mut sum = 0.0f64;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for (i, s) in samples.iter().enumerate().skip(1) {
        let d = s.inter_arrival_ms.ok_or(SummaryError::MissingDelta(i))?;
        sum += d;
        min = min.min(d);
        max = max.max(d);
    }
    let deltas = (samples.len() - 1) as f64;
    Ok(StreamSummary {
        stream: samples[0].stream,
        packets_count: samples.len() as u64,
        mean_ms: (sum / deltas).clamp(min, max),
        min_ms: min,
        max_ms: max,
    })
}

/// Collects received samples per stream and derives deltas as they arrive.
#[derive(Debug, Default)]
pub struct LatencyRecorder {
    streams: BTreeMap<StreamLabel, Vec<LatencySample>>,
}

impl LatencyRecorder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, r: ReceivedSample) {
        let series = self.streams.entry(r.label).or_default();
        let inter_arrival_ms = series.last().map(|p| ns_to_ms(r.receipt_ns.saturating_sub(p.receipt_ns)));
        series.push(LatencySample { stream: r.label, seq: r.seq, receipt_ns: r.receipt_ns, inter_arrival_ms });
    }

    /// Drains everything currently queued on `rx` without blocking.
    pub fn drain(&mut self, rx: &Receiver<ReceivedSample>) -> usize {
        let mut n = 0;
        while let Ok(r) = rx.try_recv() {
            self.record(r);
            n += 1;
        }
        n
    }

    pub fn samples(&self, stream: StreamLabel) -> &[LatencySample] {
        self.streams.get(&stream).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn all_samples(&self) -> Vec<LatencySample> {
        self.streams.values().flatten().copied().collect()
    }

    pub fn streams(&self) -> impl Iterator<Item = StreamLabel> + '_ {
        self.streams.keys().copied()
    }
}
