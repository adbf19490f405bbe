//! CAN and CAN FD frames wrapped for transport over Ethernet.
//!
//! Each frame is serialized as `[id:4][flags:1][len:1][data:len]` with a
//! big-endian identifier; flag bit 0 marks CAN FD. Classic frames carry
//! exactly 8 data bytes and FD frames exactly 64.

pub const CLASSIC_LEN: usize = 8;
pub const FD_LEN: usize = 64;
pub const FRAME_HEADER_LEN: usize = 6;
pub const MAX_CAN_ID: u32 = (1 << 29) - 1;
const FLAG_FD: u8 = 0x01;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanFrame {
    pub can_id: u32,
    pub fd: bool,
    pub data: Vec<u8>,
}

impl CanFrame {
    pub fn expected_len(fd: bool) -> usize {
        if fd {
            FD_LEN
        } else {
            CLASSIC_LEN
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CanError {
    #[error("no frames to encapsulate")]
    Empty,
    #[error("identifier {0:#x} exceeds 29 bits")]
    IdOutOfRange(u32),
    #[error("frame {index}: {len} data bytes with fd={fd}")]
    LengthMismatch { index: usize, fd: bool, len: usize },
    #[error("truncated frame at offset {0}")]
    Truncated(usize),
    #[error("unknown flag bits at offset {0}")]
    BadFlags(usize),
}

pub fn encapsulate(frames: &[CanFrame]) -> Result<Vec<u8>, CanError> {
    if frames.is_empty() {
        return Err(CanError::Empty);
    }
    let mut out = Vec::with_capacity(frames.iter().map(|f| FRAME_HEADER_LEN + f.data.len()).sum());
    for (index, f) in frames.iter().enumerate() {
        if f.can_id > MAX_CAN_ID {
            return Err(CanError::IdOutOfRange(f.can_id));
        }
        if f.data.len() != CanFrame::expected_len(f.fd) {
            return Err(CanError::LengthMismatch { index, fd: f.fd, len: f.data.len() });
        }
        out.extend_from_slice(&f.can_id.to_be_bytes());
        out.push(if f.fd { FLAG_FD } else { 0 });
        out.push(f.data.len() as u8);
        out.extend_from_slice(&f.data);
    }
    Ok(out)
}

pub fn decapsulate(mut bytes: &[u8]) -> Result<Vec<CanFrame>, CanError> {
    if bytes.is_empty() {
        return Err(CanError::Empty);
    }
    let mut frames = Vec::new();
    let mut offset = 0;
    while !bytes.is_empty() {
        let Some(head) = bytes.get(..FRAME_HEADER_LEN) else {
            return Err(CanError::Truncated(offset));
        };
        let can_id = u32::from_be_bytes([head[0], head[1], head[2], head[3]]);
        if can_id > MAX_CAN_ID {
            return Err(CanError::IdOutOfRange(can_id));
        }
        if head[4] & !FLAG_FD != 0 {
            return Err(CanError::BadFlags(offset));
        }
        let fd = head[4] & FLAG_FD != 0;
        let len = head[5] as usize;
        if len != CanFrame::expected_len(fd) {
            return Err(CanError::LengthMismatch { index: frames.len(), fd, len });
        }
        let Some(data) = bytes.get(FRAME_HEADER_LEN..FRAME_HEADER_LEN + len) else {
            return Err(CanError::Truncated(offset));
        };
        frames.push(CanFrame { can_id, fd, data: data.to_vec() });
        bytes = &bytes[FRAME_HEADER_LEN + len..];
        offset += FRAME_HEADER_LEN + len;
    }
    Ok(frames)
}

/// Four classic and two FD frames: the signal set of the CAN stream.
pub fn sample_signal_set(seed: u8) -> Vec<CanFrame> {
    let mk = |id: u32, fd: bool| CanFrame {
        can_id: id,
        fd,
        data: (0..CanFrame::expected_len(fd)).map(|i| seed.wrapping_add(i as u8).wrapping_mul(id as u8 | 1)).collect(),
    };
    vec![
        mk(0x18FEF100, false),
        mk(0x0CF00400, false),
        mk(0x18FEBF0B, false),
        mk(0x18F0010B, false),
        mk(0x0CFE6CEE, true),
        mk(0x18FF0A21, true),
    ]
}
