//! Entity authentication against provisioned shared secrets, and one-time
//! passcodes delivered out of band.

use std::collections::{HashMap, HashSet};
use std::time::Duration;

use rand::Rng;

use crate::codec::{hmac_tag, hmac_verify, SigningKey};

pub const CHALLENGE_LEN: usize = 16;

/// Proof of identity: a MAC over the entity id and an FMS challenge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityCredential {
    pub entity: String,
    pub challenge: [u8; CHALLENGE_LEN],
    pub tag: [u8; 32],
}

fn auth_message(entity: &str, challenge: &[u8; CHALLENGE_LEN]) -> Vec<u8> {
    let mut m = Vec::with_capacity(entity.len() + 1 + CHALLENGE_LEN);
    m.extend_from_slice(entity.as_bytes());
    m.push(0);
    m.extend_from_slice(challenge);
    m
}

impl EntityCredential {
    /// What an ECU presents for a challenge using its secret.
    pub fn answer(entity: &str, secret: &SigningKey, challenge: [u8; CHALLENGE_LEN]) -> Self {
        Self {
            entity: entity.to_string(),
            challenge,
            tag: hmac_tag(secret.as_bytes(), &auth_message(entity, &challenge)),
        }
    }
}

/// The authenticating side of the fleet management system.
#[derive(Debug, Default)]
pub struct Authenticator {
    secrets: HashMap<String, SigningKey>,
    outstanding: HashSet<[u8; CHALLENGE_LEN]>,
    unknown_entities: u64,
    failures: u64,
}

impl Authenticator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn provision(&mut self, entity: impl Into<String>, secret: SigningKey) {
        self.secrets.insert(entity.into(), secret);
    }

    pub fn challenge(&mut self, rng: &mut impl Rng) -> [u8; CHALLENGE_LEN] {
        let c: [u8; CHALLENGE_LEN] = rng.gen();
        self.outstanding.insert(c);
        c
    }

    /// True iff the MAC verifies against the stored secret for a challenge
    /// this authenticator issued and has not seen answered yet.
    pub fn authenticate(&mut self, entity: &str, cred: &EntityCredential) -> bool {
        let Some(secret) = self.secrets.get(entity) else {
            self.unknown_entities += 1;
            return false;
        };
        let fresh = self.outstanding.remove(&cred.challenge);
        let ok = fresh
            && cred.entity == entity
            && hmac_verify(secret.as_bytes(), &auth_message(entity, &cred.challenge), &cred.tag);
        if !ok {
            self.failures += 1;
        }
        ok
    }

    pub fn unknown_entities(&self) -> u64 {
        self.unknown_entities
    }

    pub fn failures(&self) -> u64 {
        self.failures
    }
}

pub const OTP_DIGITS: usize = 6;
pub const DEFAULT_OTP_WINDOW: Duration = Duration::from_secs(60);

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum OtpError {
    #[error("no passcode outstanding for this entity")]
    NotIssued,
    #[error("passcode mismatch")]
    Mismatch,
    #[error("passcode expired")]
    Expired,
}

/// Issues single-use six-digit passcodes. Times are offsets on a caller
/// supplied clock.
#[derive(Debug)]
pub struct OtpIssuer {
    window: Duration,
    outstanding: HashMap<String, (String, Duration)>,
}

impl OtpIssuer {
    pub fn new(window: Duration) -> Self {
        Self { window, outstanding: HashMap::new() }
    }

    pub fn window(&self) -> Duration {
        self.window
    }

    /// A new code for `entity`, replacing any earlier one.
    pub fn issue(&mut self, entity: &str, now: Duration, rng: &mut impl Rng) -> String {
        let code = format!("{:0width$}", rng.gen_range(0..1_000_000u32), width = OTP_DIGITS);
        self.outstanding.insert(entity.to_string(), (code.clone(), now));
        code
    }

    /// Consumes the outstanding code whatever the outcome, so each code
    /// gets exactly one attempt. Valid up to and including the end of the
    /// window.
    pub fn verify(&mut self, entity: &str, code: &str, now: Duration) -> Result<(), OtpError> {
        let (expected, issued) = self.outstanding.remove(entity).ok_or(OtpError::NotIssued)?;
        if now.saturating_sub(issued) > self.window {
            return Err(OtpError::Expired);
        }
        if code != expected {
            return Err(OtpError::Mismatch);
        }
        Ok(())
    }
}

impl Default for OtpIssuer {
    fn default() -> Self {
        Self::new(DEFAULT_OTP_WINDOW)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (Authenticator, ChaCha8Rng, SigningKey) {
        let mut a = Authenticator::new();
        let key = SigningKey::new(b"trailer-secret".to_vec());
        a.provision("trailer-7", key.clone());
        (a, ChaCha8Rng::seed_from_u64(1), key)
    }

    #[test]
    fn correct_secret_authenticates() {
        let (mut a, mut rng, key) = setup();
        let c = a.challenge(&mut rng);
        assert!(a.authenticate("trailer-7", &EntityCredential::answer("trailer-7", &key, c)));
    }

    #[test]
    fn tampered_and_replayed_credentials_fail() {
        let (mut a, mut rng, key) = setup();
        let c = a.challenge(&mut rng);
        let mut cred = EntityCredential::answer("trailer-7", &key, c);
        cred.tag[0] ^= 1;
        assert!(!a.authenticate("trailer-7", &cred));
        let c = a.challenge(&mut rng);
        let cred = EntityCredential::answer("trailer-7", &key, c);
        assert!(a.authenticate("trailer-7", &cred));
        assert!(!a.authenticate("trailer-7", &cred));
        let c = a.challenge(&mut rng);
        assert!(!a
            .authenticate("trailer-7", &EntityCredential::answer("trailer-7", &SigningKey::new(b"wrong".to_vec()), c)));
        assert_eq!(a.failures(), 3);
    }

    #[test]
    fn unknown_entity_is_counted() {
        let (mut a, mut rng, key) = setup();
        let c = a.challenge(&mut rng);
        assert!(!a.authenticate("ghost", &EntityCredential::answer("ghost", &key, c)));
        assert_eq!(a.unknown_entities(), 1);
    }

    #[test]
    fn otp_single_use_and_window() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut otp = OtpIssuer::default();
        let code = otp.issue("tractor", Duration::ZERO, &mut rng);
        assert_eq!(code.len(), 6);
        assert!(code.bytes().all(|b| b.is_ascii_digit()));
        assert_eq!(otp.verify("tractor", &code, Duration::from_secs(60)), Ok(()));
        assert_eq!(otp.verify("tractor", &code, Duration::from_secs(60)), Err(OtpError::NotIssued));

        let code = otp.issue("tractor", Duration::ZERO, &mut rng);
        assert_eq!(otp.verify("tractor", &code, Duration::from_secs(61)), Err(OtpError::Expired));

        let code = otp.issue("trailer", Duration::ZERO, &mut rng);
        let wrong = if code == "000000" { "000001" } else { "000000" };
        assert_eq!(otp.verify("trailer", wrong, Duration::from_secs(1)), Err(OtpError::Mismatch));
        assert_eq!(otp.verify("trailer", &code, Duration::from_secs(1)), Err(OtpError::NotIssued));
    }
}
