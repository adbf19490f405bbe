use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::profile::StreamLabel;

/// Supplies the bytes a producer sends for each sample.
pub trait PayloadSource: Send {
    fn next_payload(&mut self, len: usize) -> Vec<u8>;
}

/// Pseudo-random payloads from a run seed. Each stream draws from its own
/// ChaCha stream so the three producers never share state.
pub struct SeededPayloads {
    rng: ChaCha8Rng,
}

impl SeededPayloads {
    pub fn new(seed: u64, label: StreamLabel) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(label.tag() as u64);
        Self { rng }
    }
}

impl PayloadSource for SeededPayloads {
    fn next_payload(&mut self, len: usize) -> Vec<u8> {
        let mut buf = vec![0u8; len];
        self.rng.fill_bytes(&mut buf);
        buf
    }
}

/// Running SHA-256 over a sequence of payloads, in order.
#[derive(Clone, Default)]
pub struct PayloadDigest {
    hasher: Sha256,
    count: u64,
}

impl PayloadDigest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn update(&mut self, payload: &[u8]) {
        self.hasher.update((payload.len() as u64).to_be_bytes());
        self.hasher.update(payload);
        self.count += 1;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn hex(&self) -> String {
        hex::encode(self.hasher.clone().finalize())
    }
}
