use hmac::{Hmac, Mac};
use sha2::{Digest, Sha256};

use super::data::{DataPacket, SignatureKind};

type HmacSha256 = Hmac<Sha256>;

/// Shared secret for keyed packet authentication.
#[derive(Clone, PartialEq, Eq)]
pub struct SigningKey(Vec<u8>);

impl SigningKey {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Self {
        Self(bytes.into())
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

impl std::fmt::Debug for SigningKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("SigningKey(..)")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SignatureError {
    #[error("unknown signature kind {0}")]
    UnknownKind(u8),
    #[error("keyed signature requires a key")]
    MissingKey,
}

/// Bytes covered by a signature: the encoded Name followed by the raw content.
fn signed_portion(d: &DataPacket) -> Vec<u8> {
    let mut out = d.name.to_bytes();
    out.extend_from_slice(&d.content);
    out
}

pub fn hmac_tag(key: &[u8], message: &[u8]) -> [u8; 32] {
    let mut mac = HmacSha256::new_from_slice(key).expect("HMAC accepts keys of any length");
    mac.update(message);
    mac.finalize().into_bytes().into()
}

pub fn hmac_verify(key: &[u8], message: &[u8], tag: &[u8]) -> bool {
    let mut mac = HmacSha256::new_from_slice(key).expect("HMAC accepts keys of any length");
    mac.update(message);
    mac.verify_slice(tag).is_ok()
}

/// Fills in a plain SHA-256 digest signature.
pub fn digest_data(mut d: DataPacket) -> DataPacket {
    d.signature_kind = SignatureKind::DigestSha256;
    d.signature_value = Sha256::digest(signed_portion(&d)).to_vec();
    d
}

/// Fills in an HMAC-SHA-256 signature under `key`.
pub fn sign_data(mut d: DataPacket, key: &SigningKey) -> DataPacket {
    d.signature_kind = SignatureKind::HmacSha256;
    d.signature_value = hmac_tag(key.as_bytes(), &signed_portion(&d)).to_vec();
    d
}

/// Checks the packet's signature. Digest signatures need no key; keyed
/// signatures fail with [`SignatureError::MissingKey`] when none is given.
pub fn verify_data(d: &DataPacket, key: Option<&SigningKey>) -> Result<bool, SignatureError> {
    match d.signature_kind {
        SignatureKind::DigestSha256 => Ok(Sha256::digest(signed_portion(d)).as_slice() == d.signature_value),
        SignatureKind::HmacSha256 => {
            let key = key.ok_or(SignatureError::MissingKey)?;
            Ok(hmac_verify(key.as_bytes(), &signed_portion(d), &d.signature_value))
        }
        SignatureKind::Other(code) => Err(SignatureError::UnknownKind(code)),
    }
}
