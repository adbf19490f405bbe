//! The pairing state machine. Every step is total: anything unexpected
//! ends in a failed state rather than an error.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PairingEvent {
    RequestsReceived,
    AuthOk,
    AuthFail,
    FactorOk,
    FactorFail,
    CredentialsIssued,
    ServerUpdated,
    ClientProvisioned,
    Confirm,
}

impl PairingEvent {
    pub const ALL: [PairingEvent; 9] = [
        PairingEvent::RequestsReceived,
        PairingEvent::AuthOk,
        PairingEvent::AuthFail,
        PairingEvent::FactorOk,
        PairingEvent::FactorFail,
        PairingEvent::CredentialsIssued,
        PairingEvent::ServerUpdated,
        PairingEvent::ClientProvisioned,
        PairingEvent::Confirm,
    ];

    /// The nominal sequence from request to paired.
    pub const HAPPY_PATH: [PairingEvent; 7] = [
        PairingEvent::RequestsReceived,
        PairingEvent::AuthOk,
        PairingEvent::FactorOk,
        PairingEvent::CredentialsIssued,
        PairingEvent::ServerUpdated,
        PairingEvent::ClientProvisioned,
        PairingEvent::Confirm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PairingEvent::RequestsReceived => "requests-received",
            PairingEvent::AuthOk => "auth-ok",
            PairingEvent::AuthFail => "auth-fail",
            PairingEvent::FactorOk => "factor-ok",
            PairingEvent::FactorFail => "factor-fail",
            PairingEvent::CredentialsIssued => "credentials-issued",
            PairingEvent::ServerUpdated => "server-updated",
            PairingEvent::ClientProvisioned => "client-provisioned",
            PairingEvent::Confirm => "confirm",
        }
    }
}

impl fmt::Display for PairingEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FailReason {
    Auth,
    Factor,
    ProtocolViolation,
}

impl FailReason {
    pub fn as_str(self) -> &'static str {
        match self {
            FailReason::Auth => "auth",
            FailReason::Factor => "factor",
            FailReason::ProtocolViolation => "protocol-violation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairingState {
    Idle,
    RequestsReceived,
    EntitiesAuthenticated,
    FactorVerified,
    CredentialsIssued,
    ServerUpdated,
    ClientProvisioned,
    Paired,
    Failed(FailReason),
}

impl PairingState {
    pub fn is_terminal(self) -> bool {
        matches!(self, PairingState::Paired | PairingState::Failed(_))
    }
}

impl fmt::Display for PairingState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairingState::Idle => f.write_str("Idle"),
            PairingState::RequestsReceived => f.write_str("RequestsReceived"),
            PairingState::EntitiesAuthenticated => f.write_str("EntitiesAuthenticated"),
            PairingState::FactorVerified => f.write_str("FactorVerified"),
            PairingState::CredentialsIssued => f.write_str("CredentialsIssued"),
            PairingState::ServerUpdated => f.write_str("ServerUpdated"),
            PairingState::ClientProvisioned => f.write_str("ClientProvisioned"),
            PairingState::Paired => f.write_str("Paired"),
            PairingState::Failed(r) => write!(f, "Failed({})", r.as_str()),
        }
    }
}

/// One deterministic step.
pub fn step(state: PairingState, event: PairingEvent) -> PairingState {
    use PairingEvent as E;
    use PairingState as S;
    match (state, event) {
        (S::Failed(r), _) => S::Failed(r),
        (S::Idle, E::RequestsReceived) => S::RequestsReceived,
        (S::RequestsReceived, E::AuthOk) => S::EntitiesAuthenticated,
        (S::RequestsReceived, E::AuthFail) => S::Failed(FailReason::Auth),
        (S::EntitiesAuthenticated, E::FactorOk) => S::FactorVerified,
        (S::EntitiesAuthenticated, E::FactorFail) => S::Failed(FailReason::Factor),
        (S::FactorVerified, E::CredentialsIssued) => S::CredentialsIssued,
        (S::CredentialsIssued, E::ServerUpdated) => S::ServerUpdated,
        (S::ServerUpdated, E::ClientProvisioned) => S::ClientProvisioned,
        (S::ClientProvisioned, E::Confirm) => S::Paired,
        _ => S::Failed(FailReason::ProtocolViolation),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    pub event: PairingEvent,
    pub from: PairingState,
    pub to: PairingState,
}

impl Transition {
    /// The event moved the session forward rather than failing it.
    pub fn accepted(&self) -> bool {
        !matches!(self.to, PairingState::Failed(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SecondFactor {
    Geo,
    Otp,
    Both,
}

impl SecondFactor {
    pub fn as_str(self) -> &'static str {
        match self {
            SecondFactor::Geo => "geo",
            SecondFactor::Otp => "otp",
            SecondFactor::Both => "both",
        }
    }
}

impl std::str::FromStr for SecondFactor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "geo" => Ok(SecondFactor::Geo),
            "otp" => Ok(SecondFactor::Otp),
            "both" => Ok(SecondFactor::Both),
            other => Err(format!("unknown second factor '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairingSession {
    pub id: u64,
    pub tractor: String,
    pub trailer: String,
    pub factor: SecondFactor,
    state: PairingState,
}

impl PairingSession {
    pub fn new(id: u64, tractor: impl Into<String>, trailer: impl Into<String>, factor: SecondFactor) -> Self {
        Self { id, tractor: tractor.into(), trailer: trailer.into(), factor, state: PairingState::Idle }
    }

    pub fn state(&self) -> PairingState {
        self.state
    }

    pub fn advance(&mut self, event: PairingEvent) -> Transition {
        let from = self.state;
        self.state = step(from, event);
        Transition { event, from, to: self.state }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use PairingEvent as E;

    fn run(events: &[PairingEvent]) -> PairingState {
        events.iter().fold(PairingState::Idle, |s, e| step(s, *e))
    }

    #[test]
    fn happy_path_pairs() {
        assert_eq!(run(&PairingEvent::HAPPY_PATH), PairingState::Paired);
    }

    #[test]
    fn auth_fail_at_step_two() {
        assert_eq!(run(&[E::RequestsReceived, E::AuthFail]), PairingState::Failed(FailReason::Auth));
    }

    #[test]
    fn factor_fail() {
        assert_eq!(run(&[E::RequestsReceived, E::AuthOk, E::FactorFail]), PairingState::Failed(FailReason::Factor));
    }

    #[test]
    fn credentials_before_factor() {
        assert_eq!(
            run(&[E::RequestsReceived, E::AuthOk, E::CredentialsIssued]),
            PairingState::Failed(FailReason::ProtocolViolation)
        );
    }

    #[test]
    fn failures_and_paired_are_absorbing() {
        for e in PairingEvent::ALL {
            assert_eq!(step(PairingState::Failed(FailReason::Auth), e), PairingState::Failed(FailReason::Auth));
            assert_eq!(step(PairingState::Paired, e), PairingState::Failed(FailReason::ProtocolViolation));
        }
    }

    #[test]
    fn session_records_transitions() {
        let mut s = PairingSession::new(1, "tractor", "trailer", SecondFactor::Otp);
        let t = s.advance(E::RequestsReceived);
        assert!(t.accepted());
        assert_eq!((t.from, t.to), (PairingState::Idle, PairingState::RequestsReceived));
        assert!(!s.advance(E::Confirm).accepted());
        assert_eq!(s.state().to_string(), "Failed(protocol-violation)");
    }
}
