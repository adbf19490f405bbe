#![no_main]

use libfuzzer_sys::fuzz_target;
use trailerlink::codec::InterestPacket;

fuzz_target!(|data: &[u8]| {
    if let Ok((i, used)) = InterestPacket::decode(data) {
        assert!(used <= data.len());
        let again = i.encode();
        assert_eq!(InterestPacket::decode(&again).unwrap().0, i);
    }
});
