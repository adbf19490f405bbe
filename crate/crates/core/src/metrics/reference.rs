//! Published testbed figures, shown next to measured values. They come
//! from different hardware and are for comparison only.

use crate::streams::{Protocol, StreamLabel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceLatency {
    pub packets_count: u64,
    pub mean_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
}

pub fn latency(protocol: Protocol, stream: StreamLabel) -> ReferenceLatency {
    let (packets_count, mean_ms, min_ms, max_ms) = match (stream, protocol) {
        (StreamLabel::Lidar, Protocol::NdnTcp) => (238_767, 2.51, 2.15, 8.11),
        (StreamLabel::Lidar, Protocol::NdnUdp) => (152_530, 3.93, 2.22, 7.67),
        (StreamLabel::Lidar, Protocol::PubSub) => (250_949, 2.37, 0.084, 9.64),
        (StreamLabel::Can, Protocol::NdnTcp) => (72_020, 8.32, 4.14, 12.97),
        (StreamLabel::Can, Protocol::NdnUdp) => (65_838, 9.11, 4.81, 13.24),
        (StreamLabel::Can, Protocol::PubSub) => (71_447, 8.34, 4.29, 12.36),
        (StreamLabel::Cam, Protocol::NdnTcp) => (29_471, 20.35, 16.61, 24.45),
        (StreamLabel::Cam, Protocol::NdnUdp) => (28_302, 21.19, 18.48, 24.59),
        (StreamLabel::Cam, Protocol::PubSub) => (24_631, 24.21, 18.42, 41.18),
    };
    ReferenceLatency { packets_count, mean_ms, min_ms, max_ms }
}

/// Transmitter CPU percent per producer script.
pub fn producer_cpu_percent(protocol: Protocol, stream: StreamLabel) -> f64 {
    match (stream, protocol) {
        (StreamLabel::Lidar, Protocol::PubSub) => 53.62,
        (StreamLabel::Lidar, Protocol::NdnUdp) => 23.56,
        (StreamLabel::Lidar, Protocol::NdnTcp) => 7.66,
        (StreamLabel::Can, Protocol::PubSub) => 3.72,
        (StreamLabel::Can, Protocol::NdnUdp) => 9.72,
        (StreamLabel::Can, Protocol::NdnTcp) => 2.36,
        (StreamLabel::Cam, Protocol::PubSub) => 16.84,
        (StreamLabel::Cam, Protocol::NdnUdp) => 4.49,
        (StreamLabel::Cam, Protocol::NdnTcp) => 1.06,
    }
}

/// Transmitter forwarder CPU percent; none for publish-subscribe.
pub fn forwarder_cpu_percent(protocol: Protocol) -> Option<f64> {
    match protocol {
        Protocol::NdnUdp => Some(7.97),
        Protocol::NdnTcp => Some(2.65),
        Protocol::PubSub => None,
    }
}

/// Total bytes on the wire per sample: (named data, baseline).
pub fn wire_bytes(stream: StreamLabel) -> (u64, u64) {
    match stream {
        StreamLabel::Can => (244, 298),
        StreamLabel::Lidar => (2542, 2608),
        StreamLabel::Cam => (8044, 8108),
    }
}

pub const INTEREST_WIRE_BYTES: u64 = 72;
pub const ACK_WIRE_BYTES: u64 = 106;
