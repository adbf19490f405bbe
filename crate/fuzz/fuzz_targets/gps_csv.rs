#![no_main]

use libfuzzer_sys::fuzz_target;
use trailerlink::pairing::{parse_gps_csv, spoof_check, SpoofCheckParams};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((tractor, trailer)) = parse_gps_csv(text) {
        let params = SpoofCheckParams::new(1.5, 0.5, 0.5).unwrap();
        let _ = spoof_check(&tractor, &trailer, &params);
    }
});
