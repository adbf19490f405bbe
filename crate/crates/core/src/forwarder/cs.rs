use std::time::Duration;

use indexmap::IndexMap;

use crate::codec::{DataPacket, Name};

/// LRU cache of Data packets. Capacity zero disables caching entirely.
#[derive(Debug)]
pub struct ContentStore {
    capacity: usize,
    freshness: Duration,
    entries: IndexMap<Name, (DataPacket, Duration)>,
}

impl ContentStore {
    pub fn new(capacity: usize, freshness: Duration) -> Self {
        Self { capacity, freshness, entries: IndexMap::new() }
    }

    pub fn disabled() -> Self {
        Self::new(0, Duration::ZERO)
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, data: DataPacket, now: Duration) {
        if self.capacity == 0 {
            return;
        }
        self.entries.shift_remove(&data.name);
        self.entries.insert(data.name.clone(), (data, now));
        while self.entries.len() > self.capacity {
            self.entries.shift_remove_index(0);
        }
    }

    /// A cached packet for `name`. With `must_be_fresh`, only packets
    /// younger than the freshness period qualify.
    pub fn lookup(&mut self, name: &Name, must_be_fresh: bool, now: Duration) -> Option<DataPacket> {
        let idx = self.entries.get_index_of(name)?;
        let (_, inserted) = self.entries[idx];
        if must_be_fresh && now.saturating_sub(inserted) >= self.freshness {
            return None;
        }
        let last = self.entries.len() - 1;
        self.entries.move_index(idx, last);
        Some(self.entries[last].0.clone())
    }
}
