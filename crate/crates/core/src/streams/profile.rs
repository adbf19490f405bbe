use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use crate::codec::Name;
use crate::pubsub::Topic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StreamLabel {
    Lidar,
    Can,
    Cam,
}

impl StreamLabel {
    pub const ALL: [StreamLabel; 3] = [StreamLabel::Lidar, StreamLabel::Can, StreamLabel::Cam];

    pub fn as_str(self) -> &'static str {
        match self {
            StreamLabel::Lidar => "lidar",
            StreamLabel::Can => "can",
            StreamLabel::Cam => "cam",
        }
    }

    /// Identifier carried in acknowledgement frames.
    pub fn tag(self) -> u16 {
        match self {
            StreamLabel::Lidar => 1,
            StreamLabel::Can => 2,
            StreamLabel::Cam => 3,
        }
    }

    pub fn topic(self) -> Topic {
        match self {
            StreamLabel::Lidar => Topic::lidar(),
            StreamLabel::Can => Topic::can(),
            StreamLabel::Cam => Topic::cam(),
        }
    }
}

impl fmt::Display for StreamLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown stream '{0}' (expected lidar, can or cam)")]
pub struct UnknownStream(pub String);

impl FromStr for StreamLabel {
    type Err = UnknownStream;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lidar" => Ok(StreamLabel::Lidar),
            "can" => Ok(StreamLabel::Can),
            "cam" | "camera" => Ok(StreamLabel::Cam),
            _ => Err(UnknownStream(s.to_string())),
        }
    }
}

/// Which transport carries a benchmark run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Protocol {
    NdnTcp,
    NdnUdp,
    PubSub,
}

impl Protocol {
    pub const ALL: [Protocol; 3] = [Protocol::NdnTcp, Protocol::NdnUdp, Protocol::PubSub];

    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::NdnTcp => "ndn-tcp",
            Protocol::NdnUdp => "ndn-udp",
            Protocol::PubSub => "pubsub",
        }
    }

    pub fn is_ndn(self) -> bool {
        !matches!(self, Protocol::PubSub)
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown protocol '{0}' (expected ndn-tcp, ndn-udp or pubsub)")]
pub struct UnknownProtocol(pub String);

impl FromStr for Protocol {
    type Err = UnknownProtocol;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ndn-tcp" => Ok(Protocol::NdnTcp),
            "ndn-udp" => Ok(Protocol::NdnUdp),
            "pubsub" | "dds" => Ok(Protocol::PubSub),
            _ => Err(UnknownProtocol(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamProfile {
    pub label: StreamLabel,
    pub ndn_name: Name,
    pub topic: Topic,
    pub payload_bytes: usize,
    pub period: Duration,
    pub consumer_id: String,
}

impl StreamProfile {
    pub fn default_for(label: StreamLabel) -> Self {
        let (payload_bytes, period_ms, consumer) = match label {
            StreamLabel::Lidar => (2496, 1, "rpi1"),
            StreamLabel::Can => (160, 8, "rpi2"),
            StreamLabel::Cam => (8000, 20, "rpi3"),
        };
        Self {
            label,
            ndn_name: Name::from_components([b"trailer".to_vec(), label.as_str().as_bytes().to_vec()])
                .expect("static name"),
            topic: label.topic(),
            payload_bytes,
            period: Duration::from_millis(period_ms),
            consumer_id: consumer.into(),
        }
    }

    pub fn defaults() -> Vec<StreamProfile> {
        StreamLabel::ALL.into_iter().map(Self::default_for).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_profiles() {
        let p = StreamProfile::defaults();
        let summary: Vec<(&str, usize, u128, String)> = p
            .iter()
            .map(|s| (s.label.as_str(), s.payload_bytes, s.period.as_millis(), s.ndn_name.to_string()))
            .collect();
        assert_eq!(
            summary,
            [
                ("lidar", 2496, 1, "/trailer/lidar".to_string()),
                ("can", 160, 8, "/trailer/can".to_string()),
                ("cam", 8000, 20, "/trailer/cam".to_string()),
            ]
        );
        let topics: Vec<&str> = p.iter().map(|s| s.topic.name.as_str()).collect();
        assert_eq!(topics, ["Lidar", "CAN", "Cam"]);
    }

    #[test]
    fn label_and_protocol_parsing() {
        assert_eq!("CAN".parse::<StreamLabel>().unwrap(), StreamLabel::Can);
        assert!("radar".parse::<StreamLabel>().is_err());
        for p in Protocol::ALL {
            assert_eq!(p.as_str().parse::<Protocol>().unwrap(), p);
        }
    }
}
