//! Tractor-trailer pairing: GPS spoof detection, FMS authentication with a
//! second factor, the pairing state machine and the credentials it issues.

mod acl;
mod auth;
mod coordinator;
mod fsm;
mod gps;
mod trace;

pub use acl::{
    issue_credentials, issue_diagnostics_credential, AccessLevel, AclEntry, Credential, CredentialError, Token,
    WifiClient, WifiServer,
};
pub use auth::{Authenticator, EntityCredential, OtpError, OtpIssuer, CHALLENGE_LEN, DEFAULT_OTP_WINDOW, OTP_DIGITS};
pub use coordinator::{
    demo_tracks, run_pairing_demo, DemoConfig, DemoOutcome, EcuSim, Effect, FactorFailure, PairingWorld, TRACTOR_ID,
    TRAILER_ID,
};
pub use fsm::{step, FailReason, PairingEvent, PairingSession, PairingState, SecondFactor, Transition};
pub use gps::{
    latest_consistent, parse_gps_csv, spoof_check, GpsCsvError, GpsError, GpsFix, Offset, SpoofCheckParams, Verdict,
};
pub use trace::{parse_json_lines, to_json_lines, TraceRecord};
