use super::tlv::{self, DecodeError};

/// Total size of the packet at the front of `buf`, from at most its
/// first four bytes. `Ok(None)` means more bytes are needed.
pub fn frame_len(buf: &[u8]) -> Result<Option<usize>, DecodeError> {
    tlv::peek_header(buf).map(|h| h.map(|h| h.header_len + h.len)).map_err(|k| DecodeError::new(1, k))
}

/// Splits a byte stream into whole TLV packets regardless of how the
/// stream was chunked by reads.
#[derive(Debug, Default)]
pub struct StreamFramer {
    buf: Vec<u8>,
    start: usize,
}

impl StreamFramer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, bytes: &[u8]) {
        if self.start > 0 && self.start == self.buf.len() {
            self.buf.clear();
            self.start = 0;
        }
        self.buf.extend_from_slice(bytes);
    }

    pub fn buffered(&self) -> usize {
        self.buf.len() - self.start
    }

    /// Pops the next complete packet. An error leaves the stream
    /// unusable; callers should drop the connection.
    pub fn next_frame(&mut self) -> Result<Option<Vec<u8>>, DecodeError> {
        let pending = &self.buf[self.start..];
        let Some(len) = frame_len(pending)? else {
            return Ok(None);
        };
        if pending.len() < len {
            return Ok(None);
        }
        let frame = pending[..len].to_vec();
        self.start += len;
        if self.start > 64 * 1024 {
            self.buf.drain(..self.start);
            self.start = 0;
        }
        Ok(Some(frame))
    }
}
