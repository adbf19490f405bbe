//! Bytes-on-wire accounting for IPv4 over untagged Ethernet.

pub const ETHERNET_HEADER: usize = 14;
pub const IPV4_HEADER: usize = 20;
pub const UDP_HEADER: usize = 8;
pub const TCP_HEADER: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transport {
    Udp,
    Tcp,
}

impl Transport {
    pub fn header_bytes(self) -> usize {
        ETHERNET_HEADER
            + IPV4_HEADER
            + match self {
                Transport::Udp => UDP_HEADER,
                Transport::Tcp => TCP_HEADER,
            }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WireAccounting {
    pub payload_bytes: usize,
    pub protocol_overhead_bytes: usize,
    pub transport_overhead_bytes: usize,
    pub total_on_wire: usize,
}

impl WireAccounting {
    pub fn new(payload_bytes: usize, protocol_overhead_bytes: usize, transport: Transport) -> Self {
        let transport_overhead_bytes = transport.header_bytes();
        Self {
            payload_bytes,
            protocol_overhead_bytes,
            transport_overhead_bytes,
            total_on_wire: payload_bytes + protocol_overhead_bytes + transport_overhead_bytes,
        }
    }
}

impl std::ops::Add for WireAccounting {
    type Output = WireAccounting;

    fn add(self, rhs: Self) -> Self {
        Self {
            payload_bytes: self.payload_bytes + rhs.payload_bytes,
            protocol_overhead_bytes: self.protocol_overhead_bytes + rhs.protocol_overhead_bytes,
            transport_overhead_bytes: self.transport_overhead_bytes + rhs.transport_overhead_bytes,
            total_on_wire: self.total_on_wire + rhs.total_on_wire,
        }
    }
}

impl std::iter::Sum for WireAccounting {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), |a, b| a + b)
    }
}

/// Accounting for one datagram or segment carrying `packet_bytes` of
/// application-layer bytes, all counted as payload.
pub fn wire_size(packet_bytes: usize, transport: Transport) -> WireAccounting {
    WireAccounting::new(packet_bytes, 0, transport)
}
