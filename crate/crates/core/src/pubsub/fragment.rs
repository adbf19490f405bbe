use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::time::Duration;

use super::message::{Header, PubSubMessage, HEADER_LEN};

/// Smallest datagram size that still carries one payload byte.
pub const MIN_MTU: usize = HEADER_LEN + 1;
pub const DEFAULT_FRAGMENT_TIMEOUT: Duration = Duration::from_millis(100);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PublishError {
    #[error("mtu {0} is below the minimum of {MIN_MTU}")]
    MtuTooSmall(usize),
    #[error("payload is empty")]
    EmptyPayload,
    #[error("payload of {0} bytes needs more fragments than the header can count")]
    PayloadTooLarge(usize),
}

pub fn fragment_count(payload_len: usize, mtu: usize) -> usize {
    payload_len.div_ceil(mtu - HEADER_LEN)
}

/// Splits one sample into datagrams of at most `mtu` bytes. Every
/// fragment shares the sample's sequence number.
pub fn fragment(
    topic_id: u32,
    sequence: u64,
    timestamp_ns: u64,
    payload: &[u8],
    mtu: usize,
) -> Result<Vec<PubSubMessage>, PublishError> {
    if mtu < MIN_MTU {
        return Err(PublishError::MtuTooSmall(mtu));
    }
    if payload.is_empty() {
        return Err(PublishError::EmptyPayload);
    }
    let count = fragment_count(payload.len(), mtu);
    if count > u16::MAX as usize || payload.len() > u32::MAX as usize {
        return Err(PublishError::PayloadTooLarge(payload.len()));
    }
    let chunk = mtu - HEADER_LEN;
    Ok(payload
        .chunks(chunk)
        .enumerate()
        .map(|(i, part)| PubSubMessage {
            header: Header {
                flags: 0,
                topic_id,
                sequence,
                timestamp_ns,
                fragment_index: i as u16,
                fragment_count: count as u16,
                fragment_offset: (i * chunk) as u32,
                payload_len: part.len() as u32,
                sample_len: payload.len() as u32,
            },
            payload: part.to_vec(),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub topic_id: u32,
    pub sequence: u64,
    pub timestamp_ns: u64,
    pub fragments: u16,
    pub payload: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReassemblyError {
    #[error("conflicting fragments for topic {topic_id} sequence {sequence}")]
    CorruptSample { topic_id: u32, sequence: u64 },
}

#[derive(Debug)]
struct Pending {
    count: u16,
    sample_len: u32,
    timestamp_ns: u64,
    first_seen: Duration,
    parts: BTreeMap<u16, (u32, Vec<u8>)>,
}

impl Pending {
    fn matches(&self, h: &Header) -> bool {
        self.count == h.fragment_count && self.sample_len == h.sample_len && self.timestamp_ns == h.timestamp_ns
    }
}

/// Collects fragments into samples. Insertion order does not matter and
/// repeated fragments are ignored.
#[derive(Debug)]
pub struct Reassembler {
    timeout: Duration,
    pending: HashMap<(u32, u64), Pending>,
    done: HashSet<(u32, u64)>,
    done_order: VecDeque<(u32, u64)>,
    lost: u64,
    corrupt: u64,
}

const DONE_HISTORY: usize = 4096;

impl Default for Reassembler {
    fn default() -> Self {
        Self::new(DEFAULT_FRAGMENT_TIMEOUT)
    }
}

impl Reassembler {
    pub fn new(timeout: Duration) -> Self {
        Self {
            timeout,
            pending: HashMap::new(),
            done: HashSet::new(),
            done_order: VecDeque::new(),
            lost: 0,
            corrupt: 0,
        }
    }

    /// Samples abandoned after the fragment timeout.
    pub fn lost(&self) -> u64 {
        self.lost
    }

    pub fn corrupt(&self) -> u64 {
        self.corrupt
    }

    pub fn pending(&self) -> usize {
        self.pending.len()
    }

    fn fail(&mut self, key: (u32, u64)) -> ReassemblyError {
        self.pending.remove(&key);
        self.mark_done(key);
        self.corrupt += 1;
        ReassemblyError::CorruptSample { topic_id: key.0, sequence: key.1 }
    }

    fn mark_done(&mut self, key: (u32, u64)) {
        if self.done.insert(key) {
            self.done_order.push_back(key);
            if self.done_order.len() > DONE_HISTORY {
                if let Some(old) = self.done_order.pop_front() {
                    self.done.remove(&old);
                }
            }
        }
    }

    pub fn insert(&mut self, msg: &PubSubMessage, now: Duration) -> Result<Option<Sample>, ReassemblyError> {
        let h = &msg.header;
        let key = (h.topic_id, h.sequence);
        if self.done.contains(&key) {
            return Ok(None);
        }
        let entry = self.pending.entry(key).or_insert_with(|| Pending {
            count: h.fragment_count,
            sample_len: h.sample_len,
            timestamp_ns: h.timestamp_ns,
            first_seen: now,
            parts: BTreeMap::new(),
        });
        if !entry.matches(h) {
            return Err(self.fail(key));
        }
        if let Some((offset, existing)) = entry.parts.get(&h.fragment_index) {
            if *offset != h.fragment_offset || *existing != msg.payload {
                return Err(self.fail(key));
            }
            return Ok(None);
        }
        entry.parts.insert(h.fragment_index, (h.fragment_offset, msg.payload.clone()));
        if entry.parts.len() < entry.count as usize {
            return Ok(None);
        }

        let entry = self.pending.remove(&key).expect("entry present");
        let mut payload = Vec::with_capacity(entry.sample_len as usize);
        for (offset, part) in entry.parts.values() {
            if *offset as usize != payload.len() {
                self.pending.insert(key, entry);
                return Err(self.fail(key));
            }
            payload.extend_from_slice(part);
        }
        if payload.len() != entry.sample_len as usize {
            self.pending.insert(key, entry);
            return Err(self.fail(key));
        }
        self.mark_done(key);
        Ok(Some(Sample {
            topic_id: key.0,
            sequence: key.1,
            timestamp_ns: entry.timestamp_ns,
            fragments: entry.count,
            payload,
        }))
    }

    /// Drops incomplete samples older than the timeout; returns how many.
    pub fn expire(&mut self, now: Duration) -> usize {
        let timeout = self.timeout;
        let expired: Vec<(u32, u64)> =
            self.pending.iter().filter(|(_, p)| now.saturating_sub(p.first_seen) >= timeout).map(|(k, _)| *k).collect();
        for key in &expired {
            self.pending.remove(key);
            self.mark_done(*key);
        }
        self.lost += expired.len() as u64;
        expired.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn payload(n: usize) -> Vec<u8> {
        (0..n).map(|i| (i * 31 % 251) as u8).collect()
    }

    #[test]
    fn can_sample_is_one_datagram() {
        let frags = fragment(2, 0, 0, &payload(160), 1472).unwrap();
        assert_eq!(frags.len(), 1);
        assert_eq!(frags[0].encode().len(), 224);
    }

    #[test]
    fn camera_sample_is_six_fragments() {
        let frags = fragment(3, 0, 0, &payload(8000), 1472).unwrap();
        let sizes: Vec<usize> = frags.iter().map(|f| f.payload.len()).collect();
        assert_eq!(sizes, [1408, 1408, 1408, 1408, 1408, 960]);
        assert!(frags.iter().all(|f| f.encode().len() <= 1472));
    }

    #[test]
    fn exact_fit_is_single_fragment() {
        assert_eq!(fragment(1, 0, 0, &payload(1408), 1472).unwrap().len(), 1);
        assert_eq!(fragment(1, 0, 0, &payload(1409), 1472).unwrap().len(), 2);
    }

    #[test]
    fn argument_errors() {
        assert_eq!(fragment(1, 0, 0, &payload(10), 64), Err(PublishError::MtuTooSmall(64)));
        assert_eq!(fragment(1, 0, 0, &[], 1472), Err(PublishError::EmptyPayload));
        assert_eq!(fragment(1, 0, 0, &payload(3), MIN_MTU).unwrap().len(), 3);
    }

    #[test]
    fn reverse_order_with_duplicates() {
        let p = payload(8000);
        let frags = fragment(3, 9, 42, &p, 1472).unwrap();
        let mut r = Reassembler::default();
        let mut out = None;
        for f in frags.iter().rev().chain(frags.iter().take(1)) {
            if let Some(s) = r.insert(f, Duration::ZERO).unwrap() {
                assert!(out.is_none());
                out = Some(s);
            }
        }
        let s = out.unwrap();
        assert_eq!(s.payload, p);
        assert_eq!((s.topic_id, s.sequence, s.timestamp_ns, s.fragments), (3, 9, 42, 6));
    }

    #[test]
    fn duplicate_fragment_before_completion_is_ignored() {
        let frags = fragment(1, 0, 0, &payload(3000), 1472).unwrap();
        let mut r = Reassembler::default();
        assert_eq!(r.insert(&frags[0], Duration::ZERO), Ok(None));
        assert_eq!(r.insert(&frags[0], Duration::ZERO), Ok(None));
        assert!(r.insert(&frags[1], Duration::ZERO).unwrap().is_none());
        assert!(r.insert(&frags[2], Duration::ZERO).unwrap().is_some());
    }

    #[test]
    fn conflicting_fragment_is_corrupt() {
        let frags = fragment(1, 5, 0, &payload(3000), 1472).unwrap();
        let mut bad = frags[0].clone();
        bad.payload[0] ^= 1;
        let mut r = Reassembler::default();
        r.insert(&frags[0], Duration::ZERO).unwrap();
        assert_eq!(r.insert(&bad, Duration::ZERO), Err(ReassemblyError::CorruptSample { topic_id: 1, sequence: 5 }));
        assert_eq!(r.corrupt(), 1);
    }

    #[test]
    fn missing_fragment_times_out() {
        let frags = fragment(3, 0, 0, &payload(8000), 1472).unwrap();
        let mut r = Reassembler::default();
        for f in frags.iter().skip(1) {
            assert!(r.insert(f, Duration::from_millis(1)).unwrap().is_none());
        }
        assert_eq!(r.expire(Duration::from_millis(100)), 0);
        assert_eq!(r.expire(Duration::from_millis(101)), 1);
        assert_eq!(r.lost(), 1);
        // the straggler arriving late does not resurrect the sample
        assert_eq!(r.insert(&frags[0], Duration::from_millis(150)), Ok(None));
        assert_eq!(r.pending(), 0);
    }
}
