//! Result files written by child processes and read by the orchestrator.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use trailerlink::forwarder::{FaceTransport, ForwarderStats};
use trailerlink::pubsub::EndpointStats;
use trailerlink::streams::{ConsumerReport, ProducerReport};

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct WireCounters {
    pub packets: u64,
    /// Bytes handed to the socket.
    pub bytes: u64,
    /// Headers from Ethernet up, plus what was handed to the socket.
    pub wire_bytes: u64,
    /// Protocol payload plus protocol headers, per the accounting.
    pub accounted_bytes: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FaceReport {
    pub local_uri: String,
    pub remote_uri: String,
    pub network: bool,
    pub packets_in: u64,
    pub bytes_in: u64,
    pub out: WireCounters,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct ForwarderReport {
    pub interests_in: u64,
    pub interests_out: u64,
    pub data_in: u64,
    pub data_out: u64,
    pub acks_in: u64,
    pub acks_out: u64,
    pub no_route: u64,
    pub unsolicited: u64,
    pub duplicate_nonce: u64,
    pub cs_hits: u64,
    pub decode_errors: u64,
    pub faces: Vec<FaceReport>,
}

impl ForwarderReport {
    pub fn from_stats(s: &ForwarderStats) -> Self {
        let c = s.counters;
        Self {
            interests_in: c.interests_in,
            interests_out: c.interests_out,
            data_in: c.data_in,
            data_out: c.data_out,
            acks_in: c.acks_in,
            acks_out: c.acks_out,
            no_route: c.no_route,
            unsolicited: c.unsolicited,
            duplicate_nonce: c.duplicate_nonce,
            cs_hits: c.cs_hits,
            decode_errors: s.decode_errors,
            faces: s
                .faces
                .iter()
                .map(|(f, st)| FaceReport {
                    local_uri: f.local_uri.clone(),
                    remote_uri: f.remote_uri.clone(),
                    network: f.transport != FaceTransport::Internal,
                    packets_in: st.packets_in,
                    bytes_in: st.bytes_in,
                    out: WireCounters {
                        packets: st.packets_out,
                        bytes: st.bytes_out,
                        wire_bytes: st.wire_out.total_on_wire as u64,
                        accounted_bytes: (st.wire_out.payload_bytes + st.wire_out.protocol_overhead_bytes) as u64,
                    },
                })
                .collect(),
        }
    }

    pub fn network_out(&self) -> WireCounters {
        let mut total = WireCounters::default();
        for f in self.faces.iter().filter(|f| f.network) {
            total.packets += f.out.packets;
            total.bytes += f.out.bytes;
            total.wire_bytes += f.out.wire_bytes;
            total.accounted_bytes += f.out.accounted_bytes;
        }
        total
    }
}

pub fn endpoint_out(s: &EndpointStats) -> WireCounters {
    WireCounters {
        packets: s.datagrams_out,
        bytes: s.bytes_out,
        wire_bytes: s.wire_out.total_on_wire as u64,
        accounted_bytes: (s.wire_out.payload_bytes + s.wire_out.protocol_overhead_bytes) as u64,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ProducerResult {
    pub stream: String,
    pub requests: u64,
    pub samples_sent: u64,
    pub acks_received: u64,
    pub ack_timeouts: u64,
    /// Publish-subscribe endpoint output; absent for named data.
    pub endpoint_out: Option<WireCounters>,
}

impl ProducerResult {
    pub fn new(stream: &str, r: &ProducerReport) -> Self {
        Self {
            stream: stream.into(),
            requests: r.requests,
            samples_sent: r.samples_sent,
            acks_received: r.acks_received,
            ack_timeouts: r.ack_timeouts,
            endpoint_out: r.endpoint.as_ref().map(endpoint_out),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TransmitterResult {
    pub protocol: String,
    pub producers: Vec<ProducerResult>,
    pub forwarder: Option<ForwarderReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReceiverResult {
    pub protocol: String,
    pub stream: String,
    pub samples: u64,
    pub requests: u64,
    pub timeouts: u64,
    pub length_mismatches: u64,
    pub acks_sent: u64,
    pub lost: u64,
    pub payload_digest: String,
    /// Datagrams or packets that carried the stream's samples to this
    /// receiver.
    pub packets_in: u64,
    pub forwarder: Option<ForwarderReport>,
    pub endpoint_out: Option<WireCounters>,
}

impl ReceiverResult {
    pub fn new(protocol: &str, stream: &str, r: &ConsumerReport) -> Self {
        Self {
            protocol: protocol.into(),
            stream: stream.into(),
            samples: r.samples,
            requests: r.requests,
            timeouts: r.timeouts,
            length_mismatches: r.length_mismatches,
            acks_sent: r.acks_sent,
            lost: r.lost,
            payload_digest: r.payload_digest.clone(),
            packets_in: r.endpoint.map_or(0, |e| e.datagrams_in),
            forwarder: None,
            endpoint_out: r.endpoint.as_ref().map(endpoint_out),
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}
