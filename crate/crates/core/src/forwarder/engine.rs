use std::collections::{BTreeMap, HashMap, HashSet};
use std::time::Duration;

use super::cs::ContentStore;
use super::face::{FaceId, FaceTable, FaceTransport};
use super::fib::Fib;
use super::pit::{Pit, PitEntry};
use crate::codec::{AckFrame, DataPacket, InterestPacket, Name};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ForwarderError {
    #[error("unknown face {0}")]
    UnknownFace(FaceId),
}

/// What the forwarder wants sent as a result of one input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    SendInterest { face: FaceId, interest: InterestPacket },
    SendData { face: FaceId, data: DataPacket },
    SendAck { face: FaceId, ack: AckFrame },
}

impl Action {
    pub fn face(&self) -> FaceId {
        match self {
            Action::SendInterest { face, .. } | Action::SendData { face, .. } | Action::SendAck { face, .. } => *face,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ForwarderCounters {
    pub interests_in: u64,
    pub interests_out: u64,
    pub data_in: u64,
    pub data_out: u64,
    pub acks_in: u64,
    pub acks_out: u64,
    pub no_route: u64,
    pub unsolicited: u64,
    pub duplicate_nonce: u64,
    pub cs_hits: u64,
}

/// The forwarding state machine. It performs no I/O: callers feed it
/// decoded packets with the current time and carry out the returned
/// actions.
#[derive(Debug)]
pub struct Forwarder {
    faces: FaceTable,
    fib: Fib,
    pit: Pit,
    cs: ContentStore,
    counters: ForwarderCounters,
    /// For each face that last received Data, the face that Data came from.
    ack_routes: HashMap<FaceId, FaceId>,
}

impl Default for Forwarder {
    fn default() -> Self {
        Self::new(ContentStore::disabled())
    }
}

impl Forwarder {
    pub fn new(cs: ContentStore) -> Self {
        Self {
            faces: FaceTable::default(),
            fib: Fib::new(),
            pit: Pit::new(),
            cs,
            counters: Default::default(),
            ack_routes: HashMap::new(),
        }
    }

    pub fn add_face(
        &mut self,
        transport: FaceTransport,
        local_uri: impl Into<String>,
        remote_uri: impl Into<String>,
    ) -> FaceId {
        self.faces.add(transport, local_uri, remote_uri)
    }

    pub fn remove_face(&mut self, face: FaceId) -> Result<(), ForwarderError> {
        self.faces.remove(face).ok_or(ForwarderError::UnknownFace(face))?;
        self.fib.remove_face(face);
        self.pit.remove_face(face);
        self.ack_routes.retain(|k, v| *k != face && *v != face);
        Ok(())
    }

    pub fn register_prefix(&mut self, prefix: Name, face: FaceId) -> Result<(), ForwarderError> {
        if !self.faces.contains(face) {
            return Err(ForwarderError::UnknownFace(face));
        }
        self.fib.insert(prefix, face);
        Ok(())
    }

    pub fn faces(&self) -> &FaceTable {
        &self.faces
    }

    pub fn fib(&self) -> &Fib {
        &self.fib
    }

    pub fn pit(&self) -> &Pit {
        &self.pit
    }

    pub fn counters(&self) -> ForwarderCounters {
        self.counters
    }

    pub fn on_interest(&mut self, face: FaceId, interest: InterestPacket, now: Duration) -> Vec<Action> {
        self.counters.interests_in += 1;
        if self.pit.get(&interest.name).is_some_and(|e| e.expiry <= now) {
            self.pit.remove(&interest.name);
        }
        if self.pit.get(&interest.name).is_some_and(|e| e.nonces.contains(&interest.nonce)) {
            self.counters.duplicate_nonce += 1;
            return Vec::new();
        }
        if let Some(data) = self.cs.lookup(&interest.name, interest.must_be_fresh, now) {
            self.counters.cs_hits += 1;
            self.counters.data_out += 1;
            return vec![Action::SendData { face, data }];
        }

        let lifetime = Duration::from_millis(interest.lifetime_ms);
        if let Some(entry) = self.pit.get_mut(&interest.name) {
            // a new downstream joins the pending request; the same
            // downstream with a fresh nonce is a retransmission
            let retransmission = entry.downstream.insert(face, now + lifetime).is_some();
            entry.nonces.insert(interest.nonce);
            entry.expiry = entry.downstream.values().copied().max().unwrap_or(now);
            if !retransmission {
                return Vec::new();
            }
            let hops = self.next_hops(&interest.name, face);
            if hops.is_empty() {
                self.counters.no_route += 1;
            }
            return self.forward(interest, hops);
        }

        let hops = self.next_hops(&interest.name, face);
        if hops.is_empty() {
            self.counters.no_route += 1;
            return Vec::new();
        }
        self.pit.insert(PitEntry {
            name: interest.name.clone(),
            downstream: BTreeMap::from([(face, now + lifetime)]),
            nonces: HashSet::from([interest.nonce]),
            expiry: now + lifetime,
        });
        self.forward(interest, hops)
    }

    fn next_hops(&self, name: &Name, arrival: FaceId) -> Vec<FaceId> {
        self.fib
            .lookup(name)
            .map(|e| e.next_hops.iter().copied().filter(|&f| f != arrival).collect())
            .unwrap_or_default()
    }

    fn forward(&mut self, interest: InterestPacket, hops: Vec<FaceId>) -> Vec<Action> {
        self.counters.interests_out += hops.len() as u64;
        hops.into_iter().map(|face| Action::SendInterest { face, interest: interest.clone() }).collect()
    }

    pub fn on_data(&mut self, face: FaceId, data: DataPacket, now: Duration) -> Vec<Action> {
        self.counters.data_in += 1;
        let entry = match self.pit.remove(&data.name) {
            Some(e) if e.expiry > now => e,
            _ => {
                self.counters.unsolicited += 1;
                return Vec::new();
            }
        };
        let actions: Vec<Action> = entry
            .downstream
            .iter()
            .filter(|&(&f, &expiry)| f != face && expiry > now)
            .map(|(&f, _)| Action::SendData { face: f, data: data.clone() })
            .collect();
        self.counters.data_out += actions.len() as u64;
        for a in &actions {
            self.ack_routes.insert(a.face(), face);
        }
        self.cs.insert(data, now);
        actions
    }

    /// Acknowledgements travel hop by hop back towards whichever face
    /// supplied the last Data delivered to the arrival face.
    pub fn on_ack(&mut self, face: FaceId, ack: AckFrame) -> Vec<Action> {
        self.counters.acks_in += 1;
        match self.ack_routes.get(&face) {
            Some(&upstream) => {
                self.counters.acks_out += 1;
                vec![Action::SendAck { face: upstream, ack }]
            }
            None => Vec::new(),
        }
    }

    /// Removes every PIT entry whose expiry is at or before `now`.
    pub fn expire_pit(&mut self, now: Duration) -> usize {
        self.pit.expire(now)
    }
}
