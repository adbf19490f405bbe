#![no_main]

use libfuzzer_sys::fuzz_target;
use trailerlink::codec::DataPacket;

fuzz_target!(|data: &[u8]| {
    if let Ok((d, used)) = DataPacket::decode(data) {
        assert!(used <= data.len());
        let again = d.encode().expect("decoded packets re-encode");
        assert_eq!(DataPacket::decode(&again).unwrap().0, d);
    }
});
