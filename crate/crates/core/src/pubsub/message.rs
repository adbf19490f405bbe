//! Fixed 64-byte message header, big-endian throughout.
//!
//! ```text
//!  0  magic "TLPS"        4
//!  4  version             1
//!  5  flags               1   bit 0 = acknowledgement
//!  6  reserved            2
//!  8  topic id            4
//! 12  sequence number     8
//! 20  sample timestamp    8   nanoseconds, publisher clock
//! 28  fragment index      2
//! 30  fragment count      2
//! 32  fragment offset     4   byte offset of this fragment in the sample
//! 36  payload length      4   bytes following the header
//! 40  sample length       4   total bytes of the reassembled sample
//! 44  reserved           20
//! ```

pub const HEADER_LEN: usize = 64;
pub const MAGIC: [u8; 4] = *b"TLPS";
pub const VERSION: u8 = 1;
pub const FLAG_ACK: u8 = 0x01;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MessageError {
    #[error("datagram of {0} bytes is shorter than the header")]
    Short(usize),
    #[error("bad magic")]
    BadMagic,
    #[error("unsupported version {0}")]
    BadVersion(u8),
    #[error("unknown flag bits {0:#04x}")]
    BadFlags(u8),
    #[error("reserved bytes must be zero")]
    ReservedNonZero,
    #[error("fragment index {index} out of range for count {count}")]
    BadFragment { index: u16, count: u16 },
    #[error("payload length {declared} disagrees with datagram payload of {actual} bytes")]
    LengthMismatch { declared: u32, actual: usize },
    #[error("fragment extends past the end of its sample")]
    FragmentOverrun,
    #[error("acknowledgement carries payload")]
    AckWithPayload,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub flags: u8,
    pub topic_id: u32,
    pub sequence: u64,
    pub timestamp_ns: u64,
    pub fragment_index: u16,
    pub fragment_count: u16,
    pub fragment_offset: u32,
    pub payload_len: u32,
    pub sample_len: u32,
}

impl Header {
    pub fn is_ack(&self) -> bool {
        self.flags & FLAG_ACK != 0
    }

    pub fn encode(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[0..4].copy_from_slice(&MAGIC);
        out[4] = VERSION;
        out[5] = self.flags;
        out[8..12].copy_from_slice(&self.topic_id.to_be_bytes());
        out[12..20].copy_from_slice(&self.sequence.to_be_bytes());
        out[20..28].copy_from_slice(&self.timestamp_ns.to_be_bytes());
        out[28..30].copy_from_slice(&self.fragment_index.to_be_bytes());
        out[30..32].copy_from_slice(&self.fragment_count.to_be_bytes());
        out[32..36].copy_from_slice(&self.fragment_offset.to_be_bytes());
        out[36..40].copy_from_slice(&self.payload_len.to_be_bytes());
        out[40..44].copy_from_slice(&self.sample_len.to_be_bytes());
        out
    }

    fn decode(b: &[u8; HEADER_LEN]) -> Result<Self, MessageError> {
        if b[0..4] != MAGIC {
            return Err(MessageError::BadMagic);
        }
        if b[4] != VERSION {
            return Err(MessageError::BadVersion(b[4]));
        }
        if b[5] & !FLAG_ACK != 0 {
            return Err(MessageError::BadFlags(b[5]));
        }
        if b[6..8].iter().chain(&b[44..64]).any(|&x| x != 0) {
            return Err(MessageError::ReservedNonZero);
        }
        let u16_at = |i: usize| u16::from_be_bytes([b[i], b[i + 1]]);
        let u32_at = |i: usize| u32::from_be_bytes(b[i..i + 4].try_into().unwrap());
        let u64_at = |i: usize| u64::from_be_bytes(b[i..i + 8].try_into().unwrap());
        let h = Header {
            flags: b[5],
            topic_id: u32_at(8),
            sequence: u64_at(12),
            timestamp_ns: u64_at(20),
            fragment_index: u16_at(28),
            fragment_count: u16_at(30),
            fragment_offset: u32_at(32),
            payload_len: u32_at(36),
            sample_len: u32_at(40),
        };
        if h.fragment_count == 0 || h.fragment_index >= h.fragment_count {
            return Err(MessageError::BadFragment { index: h.fragment_index, count: h.fragment_count });
        }
        if h.fragment_offset as u64 + h.payload_len as u64 > h.sample_len as u64 {
            return Err(MessageError::FragmentOverrun);
        }
        Ok(h)
    }
}

/// One datagram: a header and its slice of the sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PubSubMessage {
    pub header: Header,
    pub payload: Vec<u8>,
}

impl PubSubMessage {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.payload.len());
        out.extend_from_slice(&self.header.encode());
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn decode(datagram: &[u8]) -> Result<Self, MessageError> {
        let head: &[u8; HEADER_LEN] =
            datagram.get(..HEADER_LEN).and_then(|h| h.try_into().ok()).ok_or(MessageError::Short(datagram.len()))?;
        let header = Header::decode(head)?;
        let payload = &datagram[HEADER_LEN..];
        if header.payload_len as usize != payload.len() {
            return Err(MessageError::LengthMismatch { declared: header.payload_len, actual: payload.len() });
        }
        if header.is_ack() && !payload.is_empty() {
            return Err(MessageError::AckWithPayload);
        }
        Ok(Self { header, payload: payload.to_vec() })
    }
}

/// Header-only acknowledgement echoing the completed sample's sequence number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AckMessage {
    pub topic_id: u32,
    pub sequence: u64,
    pub timestamp_ns: u64,
}

impl AckMessage {
    pub fn encode(&self) -> [u8; HEADER_LEN] {
        Header {
            flags: FLAG_ACK,
            topic_id: self.topic_id,
            sequence: self.sequence,
            timestamp_ns: self.timestamp_ns,
            fragment_index: 0,
            fragment_count: 1,
            fragment_offset: 0,
            payload_len: 0,
            sample_len: 0,
        }
        .encode()
    }

    pub fn from_message(m: &PubSubMessage) -> Option<Self> {
        m.header.is_ack().then_some(Self {
            topic_id: m.header.topic_id,
            sequence: m.header.sequence,
            timestamp_ns: m.header.timestamp_ns,
        })
    }
}
