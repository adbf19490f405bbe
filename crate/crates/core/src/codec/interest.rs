use rand::Rng;

use super::name::Name;
use super::tlv::{self, DecodeError, DecodeErrorKind};

pub const DEFAULT_LIFETIME_MS: u64 = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Nonce(pub [u8; 4]);

impl Nonce {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Nonce(rng.gen())
    }
}

impl From<u32> for Nonce {
    fn from(v: u32) -> Self {
        Nonce(v.to_be_bytes())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterestPacket {
    pub name: Name,
    pub nonce: Nonce,
    pub lifetime_ms: u64,
    pub must_be_fresh: bool,
}

impl InterestPacket {
    pub fn new(name: Name, nonce: Nonce) -> Self {
        Self { name, nonce, lifetime_ms: DEFAULT_LIFETIME_MS, must_be_fresh: false }
    }

    pub fn with_lifetime_ms(mut self, lifetime_ms: u64) -> Self {
        self.lifetime_ms = lifetime_ms;
        self
    }

    pub fn with_must_be_fresh(mut self, must_be_fresh: bool) -> Self {
        self.must_be_fresh = must_be_fresh;
        self
    }

    /// Equality ignoring the nonce: two retransmissions of one request match.
    pub fn same_request(&self, other: &InterestPacket) -> bool {
        self.name == other.name && self.lifetime_ms == other.lifetime_ms && self.must_be_fresh == other.must_be_fresh
    }

    fn value_len(&self) -> usize {
        self.name.encoded_len()
            + if self.must_be_fresh { 2 } else { 0 }
            + tlv::element_size(4)
            + tlv::element_size(tlv::nonneg_int_bytes(self.lifetime_ms).len())
    }

    pub fn encoded_len(&self) -> usize {
        tlv::element_size(self.value_len())
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        tlv::write_header(&mut out, tlv::INTEREST, self.value_len());
        self.name.encode_into(&mut out);
        if self.must_be_fresh {
            tlv::write_element(&mut out, tlv::MUST_BE_FRESH, &[]);
        }
        tlv::write_element(&mut out, tlv::NONCE, &self.nonce.0);
        tlv::write_element(&mut out, tlv::LIFETIME, &tlv::nonneg_int_bytes(self.lifetime_ms));
        out
    }

    /// Decodes one Interest from the front of `bytes`, returning it with
    /// the number of bytes it occupied. Bytes after it are left alone.
    pub fn decode(bytes: &[u8]) -> Result<(Self, usize), DecodeError> {
        let (mut r, consumed) = tlv::open_outer(bytes, tlv::INTEREST)?;
        let name = Name::decode_from(&mut r)?;
        let must_be_fresh = if r.peek_type() == Some(tlv::MUST_BE_FRESH) {
            let el = r.next_element()?;
            if !el.value.is_empty() {
                return Err(DecodeError::new(el.offset, DecodeErrorKind::BadFlag));
            }
            true
        } else {
            false
        };
        let el = r.expect(tlv::NONCE)?;
        let nonce: [u8; 4] = el
            .value
            .try_into()
            .map_err(|_| DecodeError::new(el.offset, DecodeErrorKind::BadNonceLength(el.value.len())))?;
        let el = r.expect(tlv::LIFETIME)?;
        let lifetime_ms =
            tlv::parse_nonneg_int(el.value).ok_or(DecodeError::new(el.offset, DecodeErrorKind::BadInteger))?;
        r.finish()?;
        Ok((Self { name, nonce: Nonce(nonce), lifetime_ms, must_be_fresh }, consumed))
    }
}
