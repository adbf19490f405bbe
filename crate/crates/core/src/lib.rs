//! Named-data and publish-subscribe networking for a tractor-trailer
//! Ethernet link, plus the instrumentation used to compare them and the
//! security pieces needed to pair a trailer with a tractor.

pub mod clock;
pub mod codec;
pub mod forwarder;
pub mod metrics;
pub mod pairing;
pub mod pubsub;
pub mod scenario;
pub mod streams;
