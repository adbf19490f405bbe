//! Named-data forwarder: faces, FIB, PIT, an optional content store and
//! a threaded runtime that attaches them to sockets.

mod cs;
mod engine;
mod face;
mod fib;
mod pit;
mod runtime;

pub use cs::ContentStore;
pub use engine::{Action, Forwarder, ForwarderCounters, ForwarderError};
pub use face::{Face, FaceId, FaceTable, FaceTransport};
pub use fib::{Fib, FibEntry};
pub use pit::{Pit, PitEntry};
pub use runtime::{AppFace, FaceStats, ForwarderHandle, ForwarderStats, RuntimeConfig};
