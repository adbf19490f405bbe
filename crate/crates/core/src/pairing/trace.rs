//! JSON-lines audit log of FSM transitions.

use serde::{Deserialize, Serialize};

use super::fsm::Transition;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub session: u64,
    pub event: String,
    pub from: String,
    pub to: String,
    pub t_ms: u64,
}

impl TraceRecord {
    pub fn new(session: u64, t: &Transition, t_ms: u64) -> Self {
        Self { session, event: t.event.to_string(), from: t.from.to_string(), to: t.to.to_string(), t_ms }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace record serializes")
    }
}

pub fn to_json_lines(records: &[TraceRecord]) -> String {
    records.iter().map(|r| r.to_json() + "\n").collect()
}

pub fn parse_json_lines(text: &str) -> Result<Vec<TraceRecord>, serde_json::Error> {
    text.lines().filter(|l| !l.trim().is_empty()).map(serde_json::from_str).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairing::{PairingEvent, PairingSession, SecondFactor};

    #[test]
    fn roundtrip() {
        let mut s = PairingSession::new(42, "a", "b", SecondFactor::Geo);
        let recs: Vec<_> = PairingEvent::HAPPY_PATH
            .iter()
            .enumerate()
            .map(|(i, e)| TraceRecord::new(42, &s.advance(*e), i as u64))
            .collect();
        let text = to_json_lines(&recs);
        assert_eq!(text.lines().count(), 7);
        assert!(text.lines().next().unwrap().contains(r#""event":"requests-received""#));
        assert_eq!(parse_json_lines(&text).unwrap(), recs);
        assert_eq!(recs.last().unwrap().to, "Paired");
    }
}
