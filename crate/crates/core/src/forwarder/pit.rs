use std::collections::{BTreeMap, HashMap, HashSet};
use std::time::Duration;

use super::face::FaceId;
use crate::codec::{Name, Nonce};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PitEntry {
    pub name: Name,
    /// Each requesting face with the expiry of its own request.
    pub downstream: BTreeMap<FaceId, Duration>,
    pub nonces: HashSet<Nonce>,
    /// The latest downstream expiry; the entry is live while `now < expiry`.
    pub expiry: Duration,
}

#[derive(Debug, Default)]
pub struct Pit {
    entries: HashMap<Name, PitEntry>,
}

impl Pit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &Name) -> Option<&PitEntry> {
        self.entries.get(name)
    }

    pub(crate) fn get_mut(&mut self, name: &Name) -> Option<&mut PitEntry> {
        self.entries.get_mut(name)
    }

    pub(crate) fn insert(&mut self, entry: PitEntry) {
        self.entries.insert(entry.name.clone(), entry);
    }

    pub(crate) fn remove(&mut self, name: &Name) -> Option<PitEntry> {
        self.entries.remove(name)
    }

    /// Drops every entry whose expiry is at or before `now`.
    pub fn expire(&mut self, now: Duration) -> usize {
        let before = self.entries.len();
        self.entries.retain(|_, e| e.expiry > now);
        before - self.entries.len()
    }

    pub(crate) fn remove_face(&mut self, face: FaceId) {
        self.entries.retain(|_, e| {
            e.downstream.remove(&face);
            !e.downstream.is_empty()
        });
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &PitEntry> {
        self.entries.values()
    }
}
