#![no_main]

use libfuzzer_sys::fuzz_target;
use trailerlink::codec::Packet;

fuzz_target!(|data: &[u8]| {
    if let Ok((p, used)) = Packet::decode(data) {
        assert!(used <= data.len());
        let again = p.encode().expect("decoded packets re-encode");
        assert_eq!(Packet::decode(&again).unwrap().0, p);
    }
});
