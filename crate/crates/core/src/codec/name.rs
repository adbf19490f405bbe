use std::fmt;
use std::str::FromStr;

use super::tlv::{self, DecodeError, DecodeErrorKind, Reader};

/// Upper bound on the encoded value of a Name element. Keeps every
/// Interest encodable within the two-octet length form.
pub const MAX_NAME_VALUE_LEN: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NameError {
    #[error("name must have at least one component")]
    Empty,
    #[error("name component {0} is empty")]
    EmptyComponent(usize),
    #[error("name encoding exceeds {MAX_NAME_VALUE_LEN} bytes")]
    TooLong,
    #[error("name URI must start with '/'")]
    MissingLeadingSlash,
    #[error("invalid percent escape at byte {0}")]
    BadEscape(usize),
}

/// A hierarchical content name such as `/trailer/can`.
///
/// Components are arbitrary non-empty byte strings. The text form
/// percent-encodes everything outside the URI unreserved set, so any
/// name survives a render/parse roundtrip.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name {
    components: Vec<Vec<u8>>,
}

impl Name {
    pub fn from_components<I, C>(components: I) -> Result<Self, NameError>
    where
        I: IntoIterator<Item = C>,
        C: Into<Vec<u8>>,
    {
        let components: Vec<Vec<u8>> = components.into_iter().map(Into::into).collect();
        if components.is_empty() {
            return Err(NameError::Empty);
        }
        if let Some(i) = components.iter().position(|c| c.is_empty()) {
            return Err(NameError::EmptyComponent(i));
        }
        let name = Self { components };
        if name.value_len() > MAX_NAME_VALUE_LEN {
            return Err(NameError::TooLong);
        }
        Ok(name)
    }

    pub fn components(&self) -> &[Vec<u8>] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// True when every component of `self` leads `other`.
    pub fn is_prefix_of(&self, other: &Name) -> bool {
        self.components.len() <= other.components.len()
            && self.components.iter().zip(&other.components).all(|(a, b)| a == b)
    }

    /// The first `n` components, or `None` for `n == 0` or `n > len`.
    pub fn prefix(&self, n: usize) -> Option<Name> {
        (n > 0 && n <= self.components.len()).then(|| Name { components: self.components[..n].to_vec() })
    }

    pub fn child(&self, component: impl Into<Vec<u8>>) -> Result<Name, NameError> {
        let mut components = self.components.clone();
        components.push(component.into());
        Name::from_components(components)
    }

    fn value_len(&self) -> usize {
        self.components.iter().map(|c| tlv::element_size(c.len())).sum()
    }

    /// Size of the full Name element on the wire.
    pub fn encoded_len(&self) -> usize {
        tlv::element_size(self.value_len())
    }

    pub fn encode_into(&self, out: &mut Vec<u8>) {
        tlv::write_header(out, tlv::NAME, self.value_len());
        for c in &self.components {
            tlv::write_element(out, tlv::COMPONENT, c);
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        self.encode_into(&mut out);
        out
    }

    pub(crate) fn decode_from(reader: &mut Reader<'_>) -> Result<Name, DecodeError> {
        let el = reader.expect(tlv::NAME)?;
        if el.value.len() > MAX_NAME_VALUE_LEN {
            return Err(DecodeError::new(el.offset, DecodeErrorKind::NameTooLong));
        }
        let mut inner = Reader::new(el.value, el.value_offset, false);
        let mut components = Vec::new();
        while !inner.is_empty() {
            let c = inner.expect(tlv::COMPONENT)?;
            if c.value.is_empty() {
                return Err(DecodeError::new(c.offset, DecodeErrorKind::EmptyComponent));
            }
            components.push(c.value.to_vec());
        }
        if components.is_empty() {
            return Err(DecodeError::new(el.offset, DecodeErrorKind::EmptyName));
        }
        Ok(Name { components })
    }
}

fn is_unreserved(b: u8) -> bool {
    b.is_ascii_alphanumeric() || matches!(b, b'-' | b'.' | b'_' | b'~')
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.components {
            f.write_str("/")?;
            for &b in c {
                if is_unreserved(b) {
                    write!(f, "{}", b as char)?;
                } else {
                    write!(f, "%{b:02X}")?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Name({self})")
    }
}

fn hex_val(b: u8) -> Option<u8> {
    match b {
        b'0'..=b'9' => Some(b - b'0'),
        b'a'..=b'f' => Some(b - b'a' + 10),
        b'A'..=b'F' => Some(b - b'A' + 10),
        _ => None,
    }
}

impl FromStr for Name {
    type Err = NameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bytes = s.as_bytes();
        if bytes.first() != Some(&b'/') {
            return Err(NameError::MissingLeadingSlash);
        }
        let mut components = Vec::new();
        let mut current = Vec::new();
        let mut i = 1;
        while i < bytes.len() {
            match bytes[i] {
                b'/' => {
                    components.push(std::mem::take(&mut current));
                    i += 1;
                }
                b'%' => {
                    let hi = bytes.get(i + 1).copied().and_then(hex_val);
                    let lo = bytes.get(i + 2).copied().and_then(hex_val);
                    match (hi, lo) {
                        (Some(hi), Some(lo)) => current.push(hi << 4 | lo),
                        _ => return Err(NameError::BadEscape(i)),
                    }
                    i += 3;
                }
                b => {
                    current.push(b);
                    i += 1;
                }
            }
        }
        components.push(current);
        Name::from_components(components)
    }
}

impl TryFrom<&str> for Name {
    type Error = NameError;

    fn try_from(s: &str) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_renders() {
        let n: Name = "/trailer/can".parse().unwrap();
        assert_eq!(n.components(), &[b"trailer".to_vec(), b"can".to_vec()]);
        assert_eq!(n.to_string(), "/trailer/can");
    }

    #[test]
    fn escapes_reserved_bytes() {
        let n = Name::from_components([b"a/b".to_vec(), vec![0, 0xFF, b'%']]).unwrap();
        assert_eq!(n.to_string(), "/a%2Fb/%00%FF%25");
        assert_eq!(n.to_string().parse::<Name>().unwrap(), n);
    }

    #[test]
    fn rejects_malformed_text() {
        assert_eq!("trailer".parse::<Name>(), Err(NameError::MissingLeadingSlash));
        assert_eq!("/".parse::<Name>(), Err(NameError::EmptyComponent(0)));
        assert_eq!("/a//b".parse::<Name>(), Err(NameError::EmptyComponent(1)));
        assert_eq!("/a/%4".parse::<Name>(), Err(NameError::BadEscape(3)));
        assert_eq!("/a/%zz".parse::<Name>(), Err(NameError::BadEscape(3)));
    }

    #[test]
    fn single_component_name_is_five_bytes() {
        let n: Name = "/a".parse().unwrap();
        assert_eq!(n.to_bytes(), [0x07, 0x03, 0x08, 0x01, b'a']);
    }

    #[test]
    fn prefix_relations() {
        let t: Name = "/trailer".parse().unwrap();
        let tc: Name = "/trailer/can".parse().unwrap();
        assert!(t.is_prefix_of(&tc));
        assert!(tc.is_prefix_of(&tc));
        assert!(!tc.is_prefix_of(&t));
        assert_eq!(tc.prefix(1).unwrap(), t);
        assert_eq!(tc.prefix(0), None);
        assert_eq!(t.child("can").unwrap(), tc);
    }

    #[test]
    fn oversized_name_rejected() {
        let big = vec![b'x'; MAX_NAME_VALUE_LEN];
        assert_eq!(Name::from_components([big]), Err(NameError::TooLong));
    }
}
