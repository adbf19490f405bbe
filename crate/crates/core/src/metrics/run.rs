use super::latency::StreamSummary;
use super::resources::ResourceUsage;
use crate::streams::Protocol;

/// Everything measured in one protocol run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub protocol: Protocol,
    pub streams: Vec<StreamSummary>,
    pub resources: Vec<ResourceUsage>,
    /// Bytes sent on the wire by all endpoints, headers included.
    pub wire_bytes: u64,
    pub wire_packets: u64,
}

impl RunSummary {
    pub fn new(protocol: Protocol) -> Self {
        Self { protocol, streams: Vec::new(), resources: Vec::new(), wire_bytes: 0, wire_packets: 0 }
    }

    pub fn stream(&self, label: crate::streams::StreamLabel) -> Option<&StreamSummary> {
        self.streams.iter().find(|s| s.stream == label)
    }
}
