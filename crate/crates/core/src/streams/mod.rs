//! Virtual ECU traffic: the three sensor/CAN stream profiles, the loops
//! that produce and consume them over either transport, and CAN frame
//! encapsulation for the Ethernet gateway.

mod apps;
pub mod can;
mod pacing;
mod payload;
mod profile;

pub use apps::{
    spawn_ndn_consumer, spawn_ndn_producer, spawn_publisher, spawn_subscriber, AppOptions, ConsumerReport,
    DelayPlacement, ProducerReport, ReceivedSample, RunHandle, RunLimits, StartError,
};
pub use can::{decapsulate, encapsulate, CanError, CanFrame};
pub use pacing::{Pacer, PacingMode};
pub use payload::{PayloadDigest, PayloadSource, SeededPayloads};
pub use profile::{Protocol, StreamLabel, StreamProfile, UnknownProtocol, UnknownStream};
