use std::collections::HashMap;

use super::face::FaceId;
use crate::codec::Name;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FibEntry {
    pub prefix: Name,
    pub next_hops: Vec<FaceId>,
}

/// Forwarding table keyed by exact prefix. Longest-prefix lookup probes
/// the prefixes of the query name from longest to shortest, so its cost
/// is bounded by the name's component count rather than table size.
#[derive(Debug, Default)]
pub struct Fib {
    entries: HashMap<Name, FibEntry>,
}

impl Fib {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `face` as a next hop for `prefix`; a repeated registration is a no-op.
    pub fn insert(&mut self, prefix: Name, face: FaceId) {
        let entry = self.entries.entry(prefix.clone()).or_insert_with(|| FibEntry { prefix, next_hops: Vec::new() });
        if !entry.next_hops.contains(&face) {
            entry.next_hops.push(face);
        }
    }

    pub fn remove(&mut self, prefix: &Name, face: FaceId) -> bool {
        let Some(entry) = self.entries.get_mut(prefix) else {
            return false;
        };
        let before = entry.next_hops.len();
        entry.next_hops.retain(|&f| f != face);
        let removed = entry.next_hops.len() != before;
        if entry.next_hops.is_empty() {
            self.entries.remove(prefix);
        }
        removed
    }

    pub fn remove_face(&mut self, face: FaceId) {
        self.entries.retain(|_, e| {
            e.next_hops.retain(|&f| f != face);
            !e.next_hops.is_empty()
        });
    }

    pub fn lookup(&self, name: &Name) -> Option<&FibEntry> {
        (1..=name.len()).rev().find_map(|n| self.entries.get(&name.prefix(n)?))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &FibEntry> {
        self.entries.values()
    }
}
