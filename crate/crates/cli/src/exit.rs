//! Process exit codes.

pub const SUCCESS: u8 = 0;
/// spoof-check found at least one inconsistent index.
pub const SPOOF_DETECTED: u8 = 1;
pub const CONFIG_ERROR: u8 = 2;
pub const RUNTIME_ABORT: u8 = 3;
pub const INVARIANT_VIOLATION: u8 = 4;
/// pairing-demo outcomes other than Paired.
pub const PAIRING_FAILED_AUTH: u8 = 10;
pub const PAIRING_FAILED_FACTOR: u8 = 11;
pub const PAIRING_PROTOCOL_VIOLATION: u8 = 12;
pub const PAIRING_INCOMPLETE: u8 = 13;
