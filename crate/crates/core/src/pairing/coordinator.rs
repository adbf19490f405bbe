//! The FMS coordinator. It owns one pairing session, talks to simulated
//! tractor and trailer ECUs over channels, and applies the side effects of
//! each step only when the state machine accepts it.

use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::acl::{issue_credentials, AclEntry, Credential, WifiClient, WifiServer};
use super::auth::{Authenticator, EntityCredential, OtpError, OtpIssuer, CHALLENGE_LEN, DEFAULT_OTP_WINDOW};
use super::fsm::{step, PairingEvent, PairingSession, PairingState, SecondFactor, Transition};
use super::gps::{latest_consistent, GpsError, GpsFix, SpoofCheckParams};
use super::trace::TraceRecord;
use crate::codec::SigningKey;

/// Observable side effects, in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Effect {
    CredentialIssued { credential_id: u64 },
    AclUpdated { credential_id: u64 },
    ClientProvisioned { credential_id: u64, server_had_token: bool },
    Confirmed { admitted: bool },
}

/// A session together with the Wi-Fi server and client it configures.
pub struct PairingWorld {
    session: PairingSession,
    server: WifiServer,
    client: WifiClient,
    credential: Option<Credential>,
    rng: ChaCha8Rng,
    next_credential_id: u64,
    trace: Vec<TraceRecord>,
    effects: Vec<Effect>,
}

impl PairingWorld {
    pub fn new(session: PairingSession, seed: u64) -> Self {
        Self {
            session,
            server: WifiServer::new(),
            client: WifiClient::new(),
            credential: None,
            rng: ChaCha8Rng::seed_from_u64(seed),
            next_credential_id: 1,
            trace: Vec::new(),
            effects: Vec::new(),
        }
    }

    pub fn state(&self) -> PairingState {
        self.session.state()
    }

    pub fn session(&self) -> &PairingSession {
        &self.session
    }

    pub fn server(&self) -> &WifiServer {
        &self.server
    }

    pub fn server_mut(&mut self) -> &mut WifiServer {
        &mut self.server
    }

    pub fn client(&self) -> &WifiClient {
        &self.client
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    /// Applies `event`, running its side effect first if the step is
    /// accepted.
    pub fn apply(&mut self, event: PairingEvent, t_ms: u64) -> Transition {
        let accepted = !matches!(step(self.session.state(), event), PairingState::Failed(_));
        if accepted {
            self.side_effect(event);
        }
        let t = self.session.advance(event);
        self.trace.push(TraceRecord::new(self.session.id, &t, t_ms));
        t
    }

    fn side_effect(&mut self, event: PairingEvent) {
        match event {
            PairingEvent::CredentialsIssued => {
                let id = self.next_credential_id;
                self.next_credential_id += 1;
                let cred = issue_credentials(&self.session, id, &mut self.rng).expect("state checked by the FSM");
                self.effects.push(Effect::CredentialIssued { credential_id: id });
                self.credential = Some(cred);
            }
            PairingEvent::ServerUpdated => {
                let cred = self.credential.as_ref().expect("issued before server update");
                self.server.update_acl(cred, AclEntry::for_credential(cred));
                self.effects.push(Effect::AclUpdated { credential_id: cred.id });
            }
            PairingEvent::ClientProvisioned => {
                let cred = self.credential.clone().expect("issued before provisioning");
                let server_had_token = self.server.contains(&cred.token);
                self.effects.push(Effect::ClientProvisioned { credential_id: cred.id, server_had_token });
                self.client.provision(cred);
            }
            PairingEvent::Confirm => {
                let admitted = match self.client.credential() {
                    Some(c) => self.server.admit(&c.token.clone()).is_ok(),
                    None => false,
                };
                self.effects.push(Effect::Confirmed { admitted });
            }
            _ => {}
        }
    }
}

/// Messages from the FMS to an ECU on the primary channel.
#[derive(Debug)]
enum ToEcu {
    Challenge([u8; CHALLENGE_LEN]),
    LocationRequest,
    EchoOtp,
    Done,
}

#[derive(Debug)]
enum FromEcu {
    Request { entity: String },
    Auth(EntityCredential),
    Location { entity: String, fixes: Vec<GpsFix> },
    OtpEcho { entity: String, code: String, delay: Duration },
    NoOtp { entity: String },
}

/// A simulated ECU taking part in pairing.
#[derive(Debug, Clone)]
pub struct EcuSim {
    pub entity: String,
    pub secret: SigningKey,
    pub fixes: Vec<GpsFix>,
    pub tamper_otp: bool,
    /// Simulated time between the passcode arriving and its echo.
    pub echo_delay: Duration,
}

impl EcuSim {
    fn spawn(self, inbox: Receiver<ToEcu>, side: Receiver<String>, out: Sender<FromEcu>) -> JoinHandle<()> {
        thread::Builder::new()
            .name(format!("ecu-{}", self.entity))
            .spawn(move || {
                let _ = out.send(FromEcu::Request { entity: self.entity.clone() });
                while let Ok(msg) = inbox.recv() {
                    let reply = match msg {
                        ToEcu::Challenge(c) => FromEcu::Auth(EntityCredential::answer(&self.entity, &self.secret, c)),
                        ToEcu::LocationRequest => {
                            FromEcu::Location { entity: self.entity.clone(), fixes: self.fixes.clone() }
                        }
                        ToEcu::EchoOtp => match side.recv_timeout(Duration::from_secs(1)) {
                            Ok(mut code) => {
                                if self.tamper_otp {
                                    code = tamper(&code);
                                }
                                FromEcu::OtpEcho { entity: self.entity.clone(), code, delay: self.echo_delay }
                            }
                            Err(_) => FromEcu::NoOtp { entity: self.entity.clone() },
                        },
                        ToEcu::Done => break,
                    };
                    if out.send(reply).is_err() {
                        break;
                    }
                }
            })
            .expect("spawn ecu thread")
    }
}

fn tamper(code: &str) -> String {
    code.chars().map(|c| if c == '9' { '0' } else { char::from(c as u8 + 1) }).collect()
}

#[derive(Debug, Clone)]
pub struct DemoConfig {
    pub seed: u64,
    pub factor: SecondFactor,
    pub fail_auth: bool,
    pub wrong_otp: bool,
    /// Added to every trailer x coordinate.
    pub spoof_offset: Option<f64>,
    pub otp_window: Duration,
    pub otp_echo_delay: Duration,
    pub params: SpoofCheckParams,
    pub fixes: usize,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            factor: SecondFactor::Both,
            fail_auth: false,
            wrong_otp: false,
            spoof_offset: None,
            otp_window: DEFAULT_OTP_WINDOW,
            otp_echo_delay: Duration::from_secs(2),
            params: SpoofCheckParams::new(1.5, 0.5, 0.5).expect("valid defaults"),
            fixes: 10,
        }
    }
}

/// Why the second factor failed.
#[derive(Debug, Clone, PartialEq)]
pub enum FactorFailure {
    GpsInconsistent,
    Gps(GpsError),
    Otp { entity: String, error: OtpError },
    MissingEvidence(String),
}

#[derive(Debug)]
pub struct DemoOutcome {
    pub final_state: PairingState,
    pub trace: Vec<TraceRecord>,
    pub effects: Vec<Effect>,
    pub factor_failure: Option<FactorFailure>,
    pub unknown_entities: u64,
}

pub const TRACTOR_ID: &str = "tractor-01";
pub const TRAILER_ID: &str = "trailer-01";

/// Aligned tractor/trailer tracks whose residuals stay inside the budget.
pub fn demo_tracks(n: usize, params: &SpoofCheckParams, rng: &mut impl Rng) -> (Vec<GpsFix>, Vec<GpsFix>) {
    let (dx, dy) = match params.offset {
        super::gps::Offset::Scalar(d) => (d, d),
        super::gps::Offset::PerAxis { dx, dy } => (dx, dy),
    };
    let jitter = params.budget() / 2.0;
    (0..n as u64)
        .map(|t| {
            let x = 1000.0 + 2.5 * t as f64;
            let y = 500.0 + 0.5 * t as f64;
            let jx = if jitter > 0.0 { rng.gen_range(-jitter..=jitter) } else { 0.0 };
            let jy = if jitter > 0.0 { rng.gen_range(-jitter..=jitter) } else { 0.0 };
            (GpsFix::new(t, x, y), GpsFix::new(t, x - dx + jx, y - dy + jy))
        })
        .unzip()
}

const REPLY_TIMEOUT: Duration = Duration::from_secs(2);

struct Link {
    primary: Sender<ToEcu>,
    side: Sender<String>,
    thread: JoinHandle<()>,
}

/// Runs a full pairing with simulated ECUs and returns the trace.
pub fn run_pairing_demo(cfg: &DemoConfig) -> DemoOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let tractor_key = SigningKey::new(rng.gen::<[u8; 32]>().to_vec());
    let trailer_key = SigningKey::new(rng.gen::<[u8; 32]>().to_vec());
    let mut auth = Authenticator::new();
    auth.provision(TRACTOR_ID, tractor_key.clone());
    auth.provision(TRAILER_ID, trailer_key.clone());

    let (tractor_fixes, mut trailer_fixes) = demo_tracks(cfg.fixes.max(1), &cfg.params, &mut rng);
    if let Some(off) = cfg.spoof_offset {
        for f in &mut trailer_fixes {
            f.x += off;
        }
    }
    let trailer_secret =
        if cfg.fail_auth { SigningKey::new(b"not-the-provisioned-secret".to_vec()) } else { trailer_key };
    let ecus = [
        EcuSim {
            entity: TRACTOR_ID.into(),
            secret: tractor_key,
            fixes: tractor_fixes,
            tamper_otp: false,
            echo_delay: cfg.otp_echo_delay,
        },
        EcuSim {
            entity: TRAILER_ID.into(),
            secret: trailer_secret,
            fixes: trailer_fixes,
            tamper_otp: cfg.wrong_otp,
            echo_delay: cfg.otp_echo_delay,
        },
    ];

    let (out_tx, inbox) = mpsc::channel();
    let links: Vec<Link> = ecus
        .into_iter()
        .map(|ecu| {
            let (primary, rx) = mpsc::channel();
            let (side, side_rx) = mpsc::channel();
            let thread = ecu.spawn(rx, side_rx, out_tx.clone());
            Link { primary, side, thread }
        })
        .collect();
    drop(out_tx);

    let session = PairingSession::new(cfg.seed, TRACTOR_ID, TRAILER_ID, cfg.factor);
    let mut world = PairingWorld::new(session, rng.gen());
    let mut now = Duration::ZERO;
    let mut factor_failure = None;
    let recv = || inbox.recv_timeout(REPLY_TIMEOUT);

    let result: Result<(), RecvTimeoutError> = (|| {
        let mut requesters = Vec::new();
        for _ in 0..links.len() {
            if let FromEcu::Request { entity } = recv()? {
                requesters.push(entity);
            }
        }
        requesters.sort();
        if requesters != [TRACTOR_ID, TRAILER_ID] {
            return Ok(());
        }
        world.apply(PairingEvent::RequestsReceived, ms(now));

        let mut all_ok = true;
        for link in &links {
            let c = auth.challenge(&mut rng);
            let _ = link.primary.send(ToEcu::Challenge(c));
            match recv()? {
                FromEcu::Auth(cred) => all_ok &= auth.authenticate(&cred.entity.clone(), &cred),
                _ => all_ok = false,
            }
        }
        if !all_ok {
            world.apply(PairingEvent::AuthFail, ms(now));
            return Ok(());
        }
        world.apply(PairingEvent::AuthOk, ms(now));

        if matches!(cfg.factor, SecondFactor::Geo | SecondFactor::Both) {
            let mut tractor = None;
            let mut trailer = None;
            for link in &links {
                let _ = link.primary.send(ToEcu::LocationRequest);
                if let FromEcu::Location { entity, fixes } = recv()? {
                    if entity == TRACTOR_ID {
                        tractor = Some(fixes);
                    } else {
                        trailer = Some(fixes);
                    }
                }
            }
            factor_failure = match (tractor, trailer) {
                (Some(a), Some(b)) => match latest_consistent(&a, &b, &cfg.params) {
                    Ok(true) => None,
                    Ok(false) => Some(FactorFailure::GpsInconsistent),
                    Err(e) => Some(FactorFailure::Gps(e)),
                },
                _ => Some(FactorFailure::MissingEvidence("location".into())),
            };
        }
        if factor_failure.is_none() && matches!(cfg.factor, SecondFactor::Otp | SecondFactor::Both) {
            let mut otp = OtpIssuer::new(cfg.otp_window);
            let issued_at = now;
            for (link, entity) in links.iter().zip([TRACTOR_ID, TRAILER_ID]) {
                let code = otp.issue(entity, issued_at, &mut rng);
                let _ = link.side.send(code);
            }
            let mut latest = issued_at;
            for link in &links {
                let _ = link.primary.send(ToEcu::EchoOtp);
                let reply = recv()?;
                if factor_failure.is_some() {
                    continue;
                }
                factor_failure = match reply {
                    FromEcu::OtpEcho { entity, code, delay } => {
                        let at = issued_at + delay;
                        latest = latest.max(at);
                        otp.verify(&entity, &code, at).err().map(|error| FactorFailure::Otp { entity, error })
                    }
                    FromEcu::NoOtp { entity } => {
                        Some(FactorFailure::MissingEvidence(format!("otp echo from {entity}")))
                    }
                    _ => Some(FactorFailure::MissingEvidence("otp echo".into())),
                };
            }
            now = latest;
        }
        if factor_failure.is_some() {
            world.apply(PairingEvent::FactorFail, ms(now));
            return Ok(());
        }
        world.apply(PairingEvent::FactorOk, ms(now));
        for e in [PairingEvent::CredentialsIssued, PairingEvent::ServerUpdated, PairingEvent::ClientProvisioned] {
            world.apply(e, ms(now));
        }
        let admitted = world.client().credential().is_some_and(|c| world.server().contains(&c.token));
        if admitted {
            world.apply(PairingEvent::Confirm, ms(now));
        }
        Ok(())
    })();

    if result.is_err() && !world.state().is_terminal() {
        let e = match world.state() {
            PairingState::RequestsReceived => PairingEvent::AuthFail,
            PairingState::EntitiesAuthenticated => PairingEvent::FactorFail,
            _ => PairingEvent::Confirm,
        };
        if world.state() != PairingState::Idle {
            world.apply(e, ms(now));
        }
    }
    for link in links {
        let _ = link.primary.send(ToEcu::Done);
        drop(link.side);
        let _ = link.thread.join();
    }
    DemoOutcome {
        final_state: world.state(),
        trace: world.trace().to_vec(),
        effects: world.effects().to_vec(),
        factor_failure,
        unknown_entities: auth.unknown_entities(),
    }
}

fn ms(d: Duration) -> u64 {
    d.as_millis() as u64
}
