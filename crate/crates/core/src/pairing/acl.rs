//! Wi-Fi credentials and the server-side access control list.

use std::collections::HashMap;
use std::fmt;

use rand::Rng;

use super::fsm::{PairingSession, PairingState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AccessLevel {
    Pairing,
    Diagnostics,
}

impl AccessLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            AccessLevel::Pairing => "pairing",
            AccessLevel::Diagnostics => "diagnostics",
        }
    }

    /// The data types a holder of this level may exchange.
    pub fn privileges(self) -> &'static [&'static str] {
        match self {
            AccessLevel::Pairing => &["sensor-streams", "can-signals", "telematics"],
            AccessLevel::Diagnostics => &["diagnostic-services", "fault-codes"],
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Token([u8; 32]);

impl Token {
    pub fn random(rng: &mut impl Rng) -> Self {
        Token(rng.gen())
    }

    pub fn hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Debug for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Token({}..)", &self.hex()[..8])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Credential {
    pub id: u64,
    pub token: Token,
    pub level: AccessLevel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AclEntry {
    pub credential_id: u64,
    pub level: AccessLevel,
    pub privileges: Vec<String>,
}

impl AclEntry {
    pub fn for_credential(c: &Credential) -> Self {
        Self {
            credential_id: c.id,
            level: c.level,
            privileges: c.level.privileges().iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CredentialError {
    #[error("credentials can only be issued once the second factor is verified (state {0})")]
    WrongState(PairingState),
    #[error("token not recognised")]
    UnknownToken,
}

/// Generates a fresh pairing credential for a session that has verified
/// its second factor.
pub fn issue_credentials(session: &PairingSession, id: u64, rng: &mut impl Rng) -> Result<Credential, CredentialError> {
    if session.state() != PairingState::FactorVerified {
        return Err(CredentialError::WrongState(session.state()));
    }
    Ok(Credential { id, token: Token::random(rng), level: AccessLevel::Pairing })
}

/// Credential for a service technician's diagnostic tool.
pub fn issue_diagnostics_credential(id: u64, rng: &mut impl Rng) -> Credential {
    Credential { id, token: Token::random(rng), level: AccessLevel::Diagnostics }
}

/// The Wi-Fi server on the trailer side.
#[derive(Debug, Default)]
pub struct WifiServer {
    by_token: HashMap<Token, AclEntry>,
    rejected: u64,
}

impl WifiServer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds or replaces the entry for `cred`. A credential id keeps exactly
    /// one entry.
    pub fn update_acl(&mut self, cred: &Credential, entry: AclEntry) {
        self.by_token.retain(|_, e| e.credential_id != entry.credential_id);
        self.by_token.insert(cred.token.clone(), entry);
    }

    pub fn revoke(&mut self, credential_id: u64) -> bool {
        let before = self.by_token.len();
        self.by_token.retain(|_, e| e.credential_id != credential_id);
        before != self.by_token.len()
    }

    pub fn contains(&self, token: &Token) -> bool {
        self.by_token.contains_key(token)
    }

    pub fn entries(&self) -> usize {
        self.by_token.len()
    }

    /// A connection attempt with `token`.
    pub fn admit(&mut self, token: &Token) -> Result<&AclEntry, CredentialError> {
        match self.by_token.get(token) {
            Some(e) => Ok(e),
            None => {
                self.rejected += 1;
                Err(CredentialError::UnknownToken)
            }
        }
    }

    pub fn rejected(&self) -> u64 {
        self.rejected
    }
}

/// The Wi-Fi client on the tractor side.
#[derive(Debug, Default)]
pub struct WifiClient {
    credential: Option<Credential>,
}

impl WifiClient {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn provision(&mut self, cred: Credential) {
        self.credential = Some(cred);
    }

    pub fn credential(&self) -> Option<&Credential> {
        self.credential.as_ref()
    }
}
