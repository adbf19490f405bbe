use std::io::Write;
use std::path::Path;
use std::time::Duration;

use anyhow::{Context, Result};
use trailerlink::pairing::{run_pairing_demo, to_json_lines, DemoConfig, FailReason, PairingState, SecondFactor};

use crate::exit;

pub struct DemoArgs<'a> {
    pub seed: u64,
    pub factor: SecondFactor,
    pub fail_auth: bool,
    pub wrong_otp: bool,
    pub spoofed_gps: Option<Option<f64>>,
    pub otp_delay_s: f64,
    pub trace: Option<&'a Path>,
}

pub fn exit_code_for(state: PairingState) -> u8 {
    match state {
        PairingState::Paired => exit::SUCCESS,
        PairingState::Failed(FailReason::Auth) => exit::PAIRING_FAILED_AUTH,
        PairingState::Failed(FailReason::Factor) => exit::PAIRING_FAILED_FACTOR,
        PairingState::Failed(FailReason::ProtocolViolation) => exit::PAIRING_PROTOCOL_VIOLATION,
        _ => exit::PAIRING_INCOMPLETE,
    }
}

pub fn pairing_demo_cmd(a: &DemoArgs) -> Result<u8> {
    let base = DemoConfig::default();
    let spoof_offset = a.spoofed_gps.map(|o| o.unwrap_or(10.0 * base.params.budget()));
    let cfg = DemoConfig {
        seed: a.seed,
        factor: a.factor,
        fail_auth: a.fail_auth,
        wrong_otp: a.wrong_otp,
        spoof_offset,
        otp_echo_delay: Duration::from_secs_f64(a.otp_delay_s.max(0.0)),
        ..base
    };
    let outcome = run_pairing_demo(&cfg);
    let lines = to_json_lines(&outcome.trace);
    let mut out = std::io::stdout().lock();
    out.write_all(lines.as_bytes())?;
    if let Some(path) = a.trace {
        std::fs::write(path, &lines).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(f) = &outcome.factor_failure {
        eprintln!("second factor failed: {f:?}");
    }
    eprintln!("final state: {}", outcome.final_state);
    Ok(exit_code_for(outcome.final_state))
}
