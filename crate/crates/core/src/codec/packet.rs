use super::data::DataPacket;
use super::interest::InterestPacket;
use super::tlv::{self, DecodeError, DecodeErrorKind};

/// Application acknowledgement sent by a consumer after each Data on a
/// stream face. Eight bytes on the wire: type, length 6, a 32-bit
/// sequence number and a 16-bit stream tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AckFrame {
    pub sequence: u32,
    pub stream: u16,
}

impl AckFrame {
    pub const ENCODED_LEN: usize = 8;

    pub fn encode(&self) -> [u8; 8] {
        let mut out = [0u8; 8];
        out[0] = tlv::ACK;
        out[1] = 6;
        out[2..6].copy_from_slice(&self.sequence.to_be_bytes());
        out[6..8].copy_from_slice(&self.stream.to_be_bytes());
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<(Self, usize), DecodeError> {
        let (r, consumed) = tlv::open_outer(bytes, tlv::ACK)?;
        if consumed != Self::ENCODED_LEN {
            return Err(DecodeError::new(1, DecodeErrorKind::LengthOverrun));
        }
        if bytes.len() < Self::ENCODED_LEN {
            return Err(DecodeError::new(r.offset(), DecodeErrorKind::Truncated));
        }
        let v = &bytes[2..8];
        let sequence = u32::from_be_bytes([v[0], v[1], v[2], v[3]]);
        let stream = u16::from_be_bytes([v[4], v[5]]);
        Ok((Self { sequence, stream }, consumed))
    }
}

/// Any frame that may appear on a face.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Packet {
    Interest(InterestPacket),
    Data(DataPacket),
    Ack(AckFrame),
}

impl Packet {
    /// Decodes the packet at the front of `bytes`, dispatching on its outer type.
    pub fn decode(bytes: &[u8]) -> Result<(Self, usize), DecodeError> {
        match bytes.first() {
            None => Err(DecodeError::new(0, DecodeErrorKind::Truncated)),
            Some(&tlv::INTEREST) => InterestPacket::decode(bytes).map(|(p, n)| (Packet::Interest(p), n)),
            Some(&tlv::DATA) => DataPacket::decode(bytes).map(|(p, n)| (Packet::Data(p), n)),
            Some(&tlv::ACK) => AckFrame::decode(bytes).map(|(p, n)| (Packet::Ack(p), n)),
            Some(&other) => Err(DecodeError::new(0, DecodeErrorKind::UnknownPacketType(other))),
        }
    }

    pub fn encode(&self) -> Result<Vec<u8>, super::data::EncodeError> {
        Ok(match self {
            Packet::Interest(i) => i.encode(),
            Packet::Data(d) => d.encode()?,
            Packet::Ack(a) => a.encode().to_vec(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ack_is_eight_bytes() {
        let a = AckFrame { sequence: 0x01020304, stream: 2 };
        let bytes = a.encode();
        assert_eq!(bytes, [0x64, 6, 1, 2, 3, 4, 0, 2]);
        assert_eq!(Packet::decode(&bytes).unwrap(), (Packet::Ack(a), 8));
    }

    #[test]
    fn ack_with_wrong_length_rejected() {
        assert!(AckFrame::decode(&[0x64, 5, 1, 2, 3, 4, 0]).is_err());
        assert_eq!(AckFrame::decode(&[0x64, 6, 1, 2]).unwrap_err().kind, DecodeErrorKind::Truncated);
    }

    #[test]
    fn unknown_outer_type() {
        assert_eq!(Packet::decode(&[0x42, 0]).unwrap_err().kind, DecodeErrorKind::UnknownPacketType(0x42));
    }
}
