//! Named-data packet encoding: names, Interest and Data packets, the
//! stream acknowledgement frame, signatures and wire-size accounting.

mod data;
mod framer;
mod interest;
mod name;
mod packet;
mod sign;
pub mod tlv;
mod wire;

pub use data::{DataPacket, EncodeError, SignatureKind, DIGEST_LEN, MAX_CONTENT_LEN, MAX_SIGNATURE_LEN};
pub use framer::{frame_len, StreamFramer};
pub use interest::{InterestPacket, Nonce, DEFAULT_LIFETIME_MS};
pub use name::{Name, NameError, MAX_NAME_VALUE_LEN};
pub use packet::{AckFrame, Packet};
pub use sign::{digest_data, hmac_tag, hmac_verify, sign_data, verify_data, SignatureError, SigningKey};
pub use tlv::{DecodeError, DecodeErrorKind};
pub use wire::{wire_size, Transport, WireAccounting};

/// Bytes-on-wire for a Data packet, splitting content from envelope.
pub fn data_wire_accounting(d: &DataPacket, transport: Transport) -> WireAccounting {
    WireAccounting::new(d.content.len(), d.encoded_len() - d.content.len(), transport)
}

/// Bytes-on-wire for an Interest; the whole packet is protocol overhead.
pub fn interest_wire_accounting(i: &InterestPacket, transport: Transport) -> WireAccounting {
    WireAccounting::new(0, i.encoded_len(), transport)
}
