//! Topic-based publish-subscribe over UDP: a fixed 64-byte header,
//! fragmentation above the datagram MTU and one acknowledgement per
//! completed sample.

mod endpoint;
mod fragment;
mod message;

pub use endpoint::{Delivery, EndpointError, EndpointStats, Publisher, Subscriber, Topic};
pub use fragment::{
    fragment, fragment_count, PublishError, Reassembler, ReassemblyError, Sample, DEFAULT_FRAGMENT_TIMEOUT, MIN_MTU,
};
pub use message::{AckMessage, Header, MessageError, PubSubMessage, FLAG_ACK, HEADER_LEN};

/// Conventional UDP payload limit on a 1500-byte Ethernet link.
pub const ETHERNET_UDP_MTU: usize = 1472;

use crate::codec::{Transport, WireAccounting};

/// Wire cost of publishing one sample: one header and one UDP datagram per
/// fragment.
pub fn sample_wire_accounting(payload_len: usize, mtu: usize) -> WireAccounting {
    let n = fragment_count(payload_len, mtu).max(1);
    let per = WireAccounting::new(0, HEADER_LEN, Transport::Udp);
    let mut total: WireAccounting = std::iter::repeat_n(per, n).sum();
    total.payload_bytes = payload_len;
    total.total_on_wire += payload_len;
    total
}

/// Wire cost of one acknowledgement.
pub fn ack_wire_accounting() -> WireAccounting {
    WireAccounting::new(0, HEADER_LEN, Transport::Udp)
}
