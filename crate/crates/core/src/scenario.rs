//! Run configuration: a flat `key = value` file plus command-line overrides.

use std::fmt::Write;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::time::Duration;

use crate::codec::Name;
use crate::streams::{DelayPlacement, PacingMode, Protocol, StreamLabel, StreamProfile};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{key}: {message}")]
    Value { key: String, message: String },
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signing {
    /// Zeroed digest placeholder of the right size.
    Placeholder,
    Hmac,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub protocol: Protocol,
    pub duration: Duration,
    /// Stop each consumer after this many samples.
    pub max_samples: Option<u64>,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub profiles: Vec<StreamProfile>,
    /// Transmitter listen address; port 0 picks a free port.
    pub tx_addr: SocketAddr,
    /// One receiver address per stream, in `StreamLabel::ALL` order.
    pub rx_addrs: [SocketAddr; 3],
    pub pacing: PacingMode,
    /// `None` uses the protocol's default placement.
    pub placement: Option<DelayPlacement>,
    pub mtu: usize,
    pub timeout: Duration,
    pub sample_interval: Duration,
    pub signing: Signing,
}

fn localhost() -> SocketAddr {
    SocketAddr::from(([127, 0, 0, 1], 0))
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            protocol: Protocol::NdnTcp,
            duration: Duration::from_secs(30),
            max_samples: None,
            seed: 1,
            output_dir: PathBuf::from("trailerlink-out"),
            profiles: StreamProfile::defaults(),
            tx_addr: localhost(),
            rx_addrs: [localhost(); 3],
            pacing: PacingMode::Relative,
            placement: None,
            mtu: crate::pubsub::ETHERNET_UDP_MTU,
            timeout: Duration::from_secs(1),
            sample_interval: crate::metrics::DEFAULT_SAMPLE_INTERVAL,
            signing: Signing::Placeholder,
        }
    }
}

fn value_err(key: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Value { key: key.into(), message: message.into() }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ScenarioError> {
    v.parse().map_err(|_| value_err(key, format!("not a valid number: '{v}'")))
}

fn parse_secs(key: &str, v: &str) -> Result<Duration, ScenarioError> {
    let s: f64 = parse_num(key, v)?;
    if !s.is_finite() || !(0.0..=1e9).contains(&s) {
        return Err(value_err(key, format!("out of range: '{v}'")));
    }
    Ok(Duration::from_secs_f64(s))
}

fn parse_ms(key: &str, v: &str) -> Result<Duration, ScenarioError> {
    let ms: f64 = parse_num(key, v)?;
    if !ms.is_finite() || !(0.0..=1e9).contains(&ms) {
        return Err(value_err(key, format!("out of range: '{v}'")));
    }
    Ok(Duration::from_secs_f64(ms / 1000.0))
}

impl Scenario {
    pub fn effective_placement(&self) -> DelayPlacement {
        self.placement.unwrap_or_else(|| DelayPlacement::default_for(self.protocol))
    }

    pub fn profile(&self, label: StreamLabel) -> &StreamProfile {
        self.profiles.iter().find(|p| p.label == label).expect("all profiles present")
    }

    pub fn rx_addr(&self, label: StreamLabel) -> SocketAddr {
        self.rx_addrs[StreamLabel::ALL.iter().position(|l| *l == label).expect("known label")]
    }

    /// Parses a config file body on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let mut s = Scenario::default();
        s.apply_text(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), ScenarioError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ScenarioError::Syntax {
                line: i + 1,
                message: format!("expected key = value, got '{line}'"),
            })?;
            self.set(k.trim(), v.trim()).map_err(|e| ScenarioError::Syntax { line: i + 1, message: e.to_string() })?;
        }
        Ok(())
    }

    /// Applies one `key=value` override.
    pub fn apply_override(&mut self, kv: &str) -> Result<(), ScenarioError> {
        let (k, v) = kv.split_once('=').ok_or_else(|| value_err(kv, "expected key=value"))?;
        self.set(k.trim(), v.trim())
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<(), ScenarioError> {
        match key {
            "protocol" => {
                self.protocol = v.parse().map_err(|e: crate::streams::UnknownProtocol| value_err(key, e.to_string()))?
            }
            "duration_s" => self.duration = parse_secs(key, v)?,
            "max_samples" => {
                self.max_samples = match v {
                    "" | "none" => None,
                    _ => Some(parse_num(key, v)?),
                }
            }
            "seed" => self.seed = parse_num(key, v)?,
            "output_dir" => self.output_dir = PathBuf::from(v),
            "tx_addr" => self.tx_addr = parse_num(key, v)?,
            "pacing" => self.pacing = v.parse().map_err(|e: String| value_err(key, e))?,
            "placement" => {
                self.placement = match v {
                    "default" => None,
                    _ => Some(v.parse().map_err(|e: String| value_err(key, e))?),
                }
            }
            "mtu" => self.mtu = parse_num(key, v)?,
            "timeout_ms" => self.timeout = parse_ms(key, v)?,
            "sample_interval_ms" => self.sample_interval = parse_ms(key, v)?,
            "signing" => {
                self.signing = match v {
                    "placeholder" | "none" => Signing::Placeholder,
                    "hmac" => Signing::Hmac,
                    _ => return Err(value_err(key, format!("unknown signing mode '{v}'"))),
                }
            }
            _ => return self.set_stream_key(key, v),
        }
        Ok(())
    }

    fn set_stream_key(&mut self, key: &str, v: &str) -> Result<(), ScenarioError> {
        let (prefix, field) = key.split_once('.').ok_or_else(|| value_err(key, "unknown key"))?;
        let label: StreamLabel = prefix.parse().map_err(|_| value_err(key, "unknown key"))?;
        if field == "rx_addr" {
            let idx = StreamLabel::ALL.iter().position(|l| *l == label).expect("known label");
            self.rx_addrs[idx] = parse_num(key, v)?;
            return Ok(());
        }
        let p = self.profiles.iter_mut().find(|p| p.label == label).expect("all profiles present");
        match field {
            "payload_bytes" => p.payload_bytes = parse_num(key, v)?,
            "period_ms" => p.period = parse_ms(key, v)?,
            "name" => p.ndn_name = v.parse::<Name>().map_err(|e| value_err(key, e.to_string()))?,
            "consumer_id" => p.consumer_id = v.to_string(),
            _ => return Err(value_err(key, "unknown key")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.duration.is_zero() {
            return Err(ScenarioError::Invalid("duration_s must be greater than 0".into()));
        }
        if self.max_samples == Some(0) {
            return Err(ScenarioError::Invalid("max_samples must be greater than 0".into()));
        }
        if self.mtu < crate::pubsub::MIN_MTU || self.mtu > 65_507 {
            return Err(ScenarioError::Invalid(format!("mtu must be within {}..=65507", crate::pubsub::MIN_MTU)));
        }
        if self.timeout.is_zero() {
            return Err(ScenarioError::Invalid("timeout_ms must be greater than 0".into()));
        }
        if self.sample_interval < Duration::from_millis(10) {
            return Err(ScenarioError::Invalid("sample_interval_ms must be at least 10".into()));
        }
        for p in &self.profiles {
            if p.payload_bytes == 0 || p.payload_bytes > crate::codec::MAX_CONTENT_LEN {
                return Err(ScenarioError::Invalid(format!(
                    "{}.payload_bytes must be within 1..={}",
                    p.label,
                    crate::codec::MAX_CONTENT_LEN
                )));
            }
            if p.period.is_zero() {
                return Err(ScenarioError::Invalid(format!("{}.period_ms must be greater than 0", p.label)));
            }
        }
        for (i, a) in self.profiles.iter().enumerate() {
            for b in &self.profiles[i + 1..] {
                if a.ndn_name.is_prefix_of(&b.ndn_name) || b.ndn_name.is_prefix_of(&a.ndn_name) {
                    return Err(ScenarioError::Invalid(format!("names of {} and {} overlap", a.label, b.label)));
                }
            }
        }
        Ok(())
    }

    /// The scenario as a config file that parses back to the same value.
    pub fn to_config(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "protocol = {}", self.protocol.as_str());
        let _ = writeln!(out, "duration_s = {}", self.duration.as_secs_f64());
        let _ = writeln!(out, "max_samples = {}", self.max_samples.map_or("none".to_string(), |m| m.to_string()));
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "output_dir = {}", self.output_dir.display());
        let _ = writeln!(out, "tx_addr = {}", self.tx_addr);
        let _ = writeln!(out, "pacing = {}", self.pacing.as_str());
        let _ = writeln!(out, "placement = {}", self.placement.map_or("default", |p| p.as_str()));
        let _ = writeln!(out, "mtu = {}", self.mtu);
        let _ = writeln!(out, "timeout_ms = {}", self.timeout.as_secs_f64() * 1000.0);
        let _ = writeln!(out, "sample_interval_ms = {}", self.sample_interval.as_secs_f64() * 1000.0);
        let _ = writeln!(out, "signing = {}", if self.signing == Signing::Hmac { "hmac" } else { "placeholder" });
        for p in &self.profiles {
            let l = p.label;
            let _ = writeln!(out, "{l}.name = {}", p.ndn_name);
            let _ = writeln!(out, "{l}.payload_bytes = {}", p.payload_bytes);
            let _ = writeln!(out, "{l}.period_ms = {}", p.period.as_secs_f64() * 1000.0);
            let _ = writeln!(out, "{l}.consumer_id = {}", p.consumer_id);
            let _ = writeln!(out, "{l}.rx_addr = {}", self.rx_addr(l));
        }
        out
    }
}
