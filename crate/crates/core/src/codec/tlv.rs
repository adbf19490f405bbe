//! Type-length-value primitives shared by every named-data packet.
//!
//! Types are single octets. Lengths use one octet below 253 and the
//! `0xFD` escape followed by a two-octet big-endian value otherwise.
//! Decoding rejects non-minimal length and integer encodings so that
//! every accepted byte string has exactly one packet behind it.

use std::fmt;

pub const INTEREST: u8 = 0x05;
pub const DATA: u8 = 0x06;
pub const NAME: u8 = 0x07;
pub const COMPONENT: u8 = 0x08;
pub const NONCE: u8 = 0x0A;
pub const LIFETIME: u8 = 0x0C;
pub const MUST_BE_FRESH: u8 = 0x12;
pub const CONTENT: u8 = 0x15;
pub const SIGNATURE_INFO: u8 = 0x16;
pub const SIGNATURE_VALUE: u8 = 0x17;
/// Application-level acknowledgement carried on stream faces.
pub const ACK: u8 = 0x64;

const LENGTH_ESCAPE: u8 = 0xFD;

/// Largest value length the two-octet escape can express.
pub const MAX_LENGTH: usize = u16::MAX as usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeErrorKind {
    Truncated,
    UnexpectedType { expected: u8, found: u8 },
    UnknownPacketType(u8),
    InvalidLengthPrefix(u8),
    NonMinimalLength,
    LengthOverrun,
    TrailingBytes,
    EmptyName,
    EmptyComponent,
    NameTooLong,
    BadNonceLength(usize),
    BadInteger,
    BadFlag,
    ContentTooLarge(usize),
    BadSignatureInfo,
    SignatureTooLarge(usize),
}

impl fmt::Display for DecodeErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Truncated => write!(f, "truncated input"),
            Self::UnexpectedType { expected, found } => {
                write!(f, "expected TLV type {expected:#04x}, found {found:#04x}")
            }
            Self::UnknownPacketType(t) => write!(f, "unknown packet type {t:#04x}"),
            Self::InvalidLengthPrefix(b) => write!(f, "invalid length prefix {b:#04x}"),
            Self::NonMinimalLength => write!(f, "non-minimal length encoding"),
            Self::LengthOverrun => write!(f, "element overruns its parent"),
            Self::TrailingBytes => write!(f, "unexpected trailing element"),
            Self::EmptyName => write!(f, "name has no components"),
            Self::EmptyComponent => write!(f, "empty name component"),
            Self::NameTooLong => write!(f, "name exceeds maximum length"),
            Self::BadNonceLength(n) => write!(f, "nonce must be 4 bytes, got {n}"),
            Self::BadInteger => write!(f, "invalid non-negative integer"),
            Self::BadFlag => write!(f, "flag element must be empty"),
            Self::ContentTooLarge(n) => write!(f, "content of {n} bytes exceeds the packet limit"),
            Self::BadSignatureInfo => write!(f, "signature info must be a single kind byte"),
            Self::SignatureTooLarge(n) => write!(f, "signature value of {n} bytes is too large"),
        }
    }
}

/// A decode failure together with the absolute byte offset of the
/// element that could not be parsed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("{kind} at offset {offset}")]
pub struct DecodeError {
    pub offset: usize,
    pub kind: DecodeErrorKind,
}

impl DecodeError {
    pub fn new(offset: usize, kind: DecodeErrorKind) -> Self {
        Self { offset, kind }
    }
}

pub fn length_size(len: usize) -> usize {
    if len < LENGTH_ESCAPE as usize {
        1
    } else {
        3
    }
}

/// Total encoded size of an element with a value of `len` bytes.
pub fn element_size(len: usize) -> usize {
    1 + length_size(len) + len
}

pub fn write_header(out: &mut Vec<u8>, typ: u8, len: usize) {
    debug_assert!(len <= MAX_LENGTH);
    out.push(typ);
    if len < LENGTH_ESCAPE as usize {
        out.push(len as u8);
    } else {
        out.push(LENGTH_ESCAPE);
        out.extend_from_slice(&(len as u16).to_be_bytes());
    }
}

pub fn write_element(out: &mut Vec<u8>, typ: u8, value: &[u8]) {
    write_header(out, typ, value.len());
    out.extend_from_slice(value);
}

/// Minimal big-endian encoding of a non-negative integer in 1, 2, 4 or 8 bytes.
pub fn nonneg_int_bytes(v: u64) -> Vec<u8> {
    if v <= u8::MAX as u64 {
        vec![v as u8]
    } else if v <= u16::MAX as u64 {
        (v as u16).to_be_bytes().to_vec()
    } else if v <= u32::MAX as u64 {
        (v as u32).to_be_bytes().to_vec()
    } else {
        v.to_be_bytes().to_vec()
    }
}

pub fn parse_nonneg_int(value: &[u8]) -> Option<u64> {
    let v = match value.len() {
        1 => value[0] as u64,
        2 => u16::from_be_bytes([value[0], value[1]]) as u64,
        4 => u32::from_be_bytes(value.try_into().ok()?) as u64,
        8 => u64::from_be_bytes(value.try_into().ok()?),
        _ => return None,
    };
    // reject encodings that a shorter width could have carried
    (nonneg_int_bytes(v).len() == value.len()).then_some(v)
}

/// Header of one element: its type, value length and header size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub typ: u8,
    pub len: usize,
    pub header_len: usize,
}

/// Parses a type and length from the front of `buf`.
///
/// Returns `Ok(None)` when `buf` holds fewer bytes than the header needs;
/// at most four bytes are ever inspected.
pub fn peek_header(buf: &[u8]) -> Result<Option<Header>, DecodeErrorKind> {
    let Some(&typ) = buf.first() else {
        return Ok(None);
    };
    let Some(&first) = buf.get(1) else {
        return Ok(None);
    };
    match first {
        b if b < LENGTH_ESCAPE => Ok(Some(Header { typ, len: b as usize, header_len: 2 })),
        LENGTH_ESCAPE => {
            if buf.len() < 4 {
                return Ok(None);
            }
            let len = u16::from_be_bytes([buf[2], buf[3]]) as usize;
            if len < LENGTH_ESCAPE as usize {
                return Err(DecodeErrorKind::NonMinimalLength);
            }
            Ok(Some(Header { typ, len, header_len: 4 }))
        }
        other => Err(DecodeErrorKind::InvalidLengthPrefix(other)),
    }
}

/// Cursor over a window of a packet. `base` is the absolute offset of
/// `buf[0]` in the original input and `cut_short` records whether the
/// window ends before its parent's declared end.
pub(crate) struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    base: usize,
    cut_short: bool,
}

pub(crate) struct Element<'a> {
    pub value: &'a [u8],
    pub offset: usize,
    pub value_offset: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8], base: usize, cut_short: bool) -> Self {
        Self { buf, pos: 0, base, cut_short }
    }

    pub fn offset(&self) -> usize {
        self.base + self.pos
    }

    pub fn is_empty(&self) -> bool {
        self.pos >= self.buf.len()
    }

    pub fn peek_type(&self) -> Option<u8> {
        self.buf.get(self.pos).copied()
    }

    fn overrun(&self, at: usize) -> DecodeError {
        let kind = if self.cut_short { DecodeErrorKind::Truncated } else { DecodeErrorKind::LengthOverrun };
        DecodeError::new(at, kind)
    }

    pub fn next_element(&mut self) -> Result<Element<'a>, DecodeError> {
        let at = self.offset();
        let rest = &self.buf[self.pos..];
        let header = peek_header(rest).map_err(|k| DecodeError::new(at, k))?.ok_or_else(|| self.overrun(at))?;
        let end = header.header_len + header.len;
        if end > rest.len() {
            return Err(self.overrun(at));
        }
        let value = &rest[header.header_len..end];
        self.pos += end;
        Ok(Element { value, offset: at, value_offset: at + header.header_len })
    }

    pub fn expect(&mut self, typ: u8) -> Result<Element<'a>, DecodeError> {
        let at = self.offset();
        match self.peek_type() {
            None => Err(self.overrun(at)),
            Some(found) if found != typ => {
                Err(DecodeError::new(at, DecodeErrorKind::UnexpectedType { expected: typ, found }))
            }
            Some(_) => self.next_element(),
        }
    }

    pub fn finish(&self) -> Result<(), DecodeError> {
        if self.is_empty() {
            if self.cut_short {
                return Err(DecodeError::new(self.offset(), DecodeErrorKind::Truncated));
            }
            Ok(())
        } else {
            Err(DecodeError::new(self.offset(), DecodeErrorKind::TrailingBytes))
        }
    }
}

/// Opens the outermost element of `bytes`, which must have type `typ`.
/// Returns a reader over its value and the total size the element
/// declares (header plus value), which may exceed `bytes.len()`.
pub(crate) fn open_outer(bytes: &[u8], typ: u8) -> Result<(Reader<'_>, usize), DecodeError> {
    match bytes.first() {
        None => return Err(DecodeError::new(0, DecodeErrorKind::Truncated)),
        Some(&found) if found != typ => {
            return Err(DecodeError::new(0, DecodeErrorKind::UnexpectedType { expected: typ, found }))
        }
        _ => {}
    }
    let header = peek_header(bytes)
        .map_err(|k| DecodeError::new(1, k))?
        .ok_or(DecodeError::new(1, DecodeErrorKind::Truncated))?;
    let declared = header.header_len + header.len;
    let window_end = declared.min(bytes.len());
    let reader = Reader::new(&bytes[header.header_len..window_end], header.header_len, window_end < declared);
    Ok((reader, declared))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_forms() {
        let mut out = Vec::new();
        write_header(&mut out, 0x15, 252);
        assert_eq!(out, [0x15, 252]);
        out.clear();
        write_header(&mut out, 0x15, 253);
        assert_eq!(out, [0x15, 0xFD, 0x00, 0xFD]);
        out.clear();
        write_header(&mut out, 0x15, 8800);
        assert_eq!(out, [0x15, 0xFD, 0x22, 0x60]);
    }

    #[test]
    fn peek_rejects_bad_prefixes() {
        assert_eq!(peek_header(&[0x15, 0xFE, 0, 0]), Err(DecodeErrorKind::InvalidLengthPrefix(0xFE)));
        assert_eq!(peek_header(&[0x15, 0xFD, 0x00, 0x10]), Err(DecodeErrorKind::NonMinimalLength));
        assert_eq!(peek_header(&[0x15, 0xFD, 0x01]), Ok(None));
        assert_eq!(peek_header(&[0x15]), Ok(None));
    }

    #[test]
    fn nonneg_ints_are_minimal() {
        assert_eq!(nonneg_int_bytes(4000), vec![0x0F, 0xA0]);
        assert_eq!(parse_nonneg_int(&[0x0F, 0xA0]), Some(4000));
        assert_eq!(parse_nonneg_int(&[0x00, 0x00, 0x0F, 0xA0]), None);
        assert_eq!(parse_nonneg_int(&[0x00, 0x05]), None);
        assert_eq!(parse_nonneg_int(&[1, 2, 3]), None);
        for v in [0u64, 255, 256, 65535, 65536, u32::MAX as u64, u32::MAX as u64 + 1, u64::MAX] {
            assert_eq!(parse_nonneg_int(&nonneg_int_bytes(v)), Some(v));
        }
    }
}
