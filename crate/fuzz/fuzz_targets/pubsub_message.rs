#![no_main]

use libfuzzer_sys::fuzz_target;
use trailerlink::pubsub::PubSubMessage;

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = PubSubMessage::decode(data) {
        assert_eq!(PubSubMessage::decode(&m.encode()).unwrap(), m);
    }
});
