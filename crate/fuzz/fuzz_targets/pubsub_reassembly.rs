#![no_main]

use std::time::Duration;

use libfuzzer_sys::fuzz_target;
use trailerlink::pubsub::{PubSubMessage, Reassembler};

// Datagrams separated by two-byte big-endian lengths.
fuzz_target!(|data: &[u8]| {
    let mut r = Reassembler::new(Duration::from_millis(100));
    let mut rest = data;
    let mut now = Duration::ZERO;
    while rest.len() >= 2 {
        let len = (u16::from_be_bytes([rest[0], rest[1]]) as usize).min(rest.len() - 2);
        let (dgram, tail) = rest[2..].split_at(len);
        rest = tail;
        now += Duration::from_millis(7);
        if let Ok(m) = PubSubMessage::decode(dgram) {
            if let Ok(Some(sample)) = r.insert(&m, now) {
                assert_eq!(sample.payload.len() as u32, m.header.sample_len);
            }
        }
        r.expire(now);
    }
});
