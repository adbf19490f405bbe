//! Per-sample byte accounting for both protocols, computed from the codecs.

use super::reference;
use crate::codec::{
    data_wire_accounting, interest_wire_accounting, DataPacket, InterestPacket, Nonce, Transport, WireAccounting,
};
use crate::pubsub::{ack_wire_accounting, fragment_count, sample_wire_accounting, ETHERNET_UDP_MTU};
use crate::streams::{StreamLabel, StreamProfile};

#[derive(Debug, Clone, PartialEq)]
pub struct StreamBytes {
    pub stream: StreamLabel,
    pub payload_bytes: usize,
    pub ndn: WireAccounting,
    pub ndn_packets: usize,
    pub pubsub: WireAccounting,
    pub pubsub_packets: usize,
    /// Published totals (named data, baseline).
    pub reference: (u64, u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ByteAccounting {
    pub streams: Vec<StreamBytes>,
    pub interest: WireAccounting,
    pub ack: WireAccounting,
}

pub fn stream_bytes(profile: &StreamProfile, mtu: usize) -> StreamBytes {
    let data = DataPacket::unsigned(profile.ndn_name.clone(), vec![0; profile.payload_bytes]);
    StreamBytes {
        stream: profile.label,
        payload_bytes: profile.payload_bytes,
        ndn: data_wire_accounting(&data, Transport::Udp),
        ndn_packets: 1,
        pubsub: sample_wire_accounting(profile.payload_bytes, mtu),
        pubsub_packets: fragment_count(profile.payload_bytes, mtu),
        reference: reference::wire_bytes(profile.label),
    }
}

/// Byte accounting for the default profiles at the Ethernet datagram MTU.
pub fn default_byte_accounting() -> ByteAccounting {
    let profiles = StreamProfile::defaults();
    let can = profiles.iter().find(|p| p.label == StreamLabel::Can).expect("can profile");
    let interest = InterestPacket::new(can.ndn_name.clone(), Nonce::from(0)).with_must_be_fresh(true);
    ByteAccounting {
        streams: profiles.iter().map(|p| stream_bytes(p, ETHERNET_UDP_MTU)).collect(),
        interest: interest_wire_accounting(&interest, Transport::Udp),
        ack: ack_wire_accounting(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interest_and_ack_totals() {
        let b = default_byte_accounting();
        assert_eq!(b.interest.total_on_wire, 72);
        assert_eq!(b.ack.total_on_wire, 106);
    }

    #[test]
    fn camera_packet_counts() {
        let b = default_byte_accounting();
        let cam = b.streams.iter().find(|s| s.stream == StreamLabel::Cam).unwrap();
        assert_eq!(cam.ndn_packets, 1);
        assert_eq!(cam.pubsub_packets, 6);
        assert_eq!(cam.pubsub.protocol_overhead_bytes, 6 * 64);
        assert_eq!(cam.pubsub.transport_overhead_bytes, 6 * 42);
    }
}
