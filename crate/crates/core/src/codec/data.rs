use super::name::Name;
use super::tlv::{self, DecodeError, DecodeErrorKind};

/// Largest content a single Data packet may carry.
pub const MAX_CONTENT_LEN: usize = 8800;
pub const DIGEST_LEN: usize = 32;
/// Largest signature value accepted on encode or decode.
pub const MAX_SIGNATURE_LEN: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignatureKind {
    /// Unkeyed SHA-256 digest.
    DigestSha256,
    /// HMAC-SHA-256 under a shared key.
    HmacSha256,
    /// A kind byte this implementation does not understand.
    Other(u8),
}

impl SignatureKind {
    pub fn code(self) -> u8 {
        match self {
            Self::DigestSha256 => 0,
            Self::HmacSha256 => 1,
            Self::Other(c) => c,
        }
    }

    pub fn from_code(code: u8) -> Self {
        match code {
            0 => Self::DigestSha256,
            1 => Self::HmacSha256,
            c => Self::Other(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodeError {
    #[error("content of {0} bytes exceeds the {MAX_CONTENT_LEN}-byte packet limit")]
    ContentTooLarge(usize),
    #[error("signature value of {0} bytes exceeds {MAX_SIGNATURE_LEN} bytes")]
    SignatureTooLarge(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataPacket {
    pub name: Name,
    pub content: Vec<u8>,
    pub signature_kind: SignatureKind,
    pub signature_value: Vec<u8>,
}

impl DataPacket {
    /// A packet carrying a zeroed placeholder digest. Benchmarks use this
    /// so packet sizes are fixed and no hashing cost is paid per packet.
    pub fn unsigned(name: Name, content: Vec<u8>) -> Self {
        Self { name, content, signature_kind: SignatureKind::DigestSha256, signature_value: vec![0; DIGEST_LEN] }
    }

    fn value_len(&self) -> usize {
        self.name.encoded_len()
            + tlv::element_size(self.content.len())
            + tlv::element_size(1)
            + tlv::element_size(self.signature_value.len())
    }

    pub fn encoded_len(&self) -> usize {
        tlv::element_size(self.value_len())
    }

    pub fn encode(&self) -> Result<Vec<u8>, EncodeError> {
        if self.content.len() > MAX_CONTENT_LEN {
            return Err(EncodeError::ContentTooLarge(self.content.len()));
        }
        if self.signature_value.len() > MAX_SIGNATURE_LEN {
            return Err(EncodeError::SignatureTooLarge(self.signature_value.len()));
        }
        let mut out = Vec::with_capacity(self.encoded_len());
        tlv::write_header(&mut out, tlv::DATA, self.value_len());
        self.name.encode_into(&mut out);
        tlv::write_element(&mut out, tlv::CONTENT, &self.content);
        tlv::write_element(&mut out, tlv::SIGNATURE_INFO, &[self.signature_kind.code()]);
        tlv::write_element(&mut out, tlv::SIGNATURE_VALUE, &self.signature_value);
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<(Self, usize), DecodeError> {
        let (mut r, consumed) = tlv::open_outer(bytes, tlv::DATA)?;
        let name = Name::decode_from(&mut r)?;
        let el = r.expect(tlv::CONTENT)?;
        if el.value.len() > MAX_CONTENT_LEN {
            return Err(DecodeError::new(el.offset, DecodeErrorKind::ContentTooLarge(el.value.len())));
        }
        let content = el.value.to_vec();
        let el = r.expect(tlv::SIGNATURE_INFO)?;
        let &[kind] = el.value else {
            return Err(DecodeError::new(el.offset, DecodeErrorKind::BadSignatureInfo));
        };
        let el = r.expect(tlv::SIGNATURE_VALUE)?;
        if el.value.len() > MAX_SIGNATURE_LEN {
            return Err(DecodeError::new(el.offset, DecodeErrorKind::SignatureTooLarge(el.value.len())));
        }
        let signature_value = el.value.to_vec();
        r.finish()?;
        let packet = Self { name, content, signature_kind: SignatureKind::from_code(kind), signature_value };
        Ok((packet, consumed))
    }
}
