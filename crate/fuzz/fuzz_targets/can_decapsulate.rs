#![no_main]

use libfuzzer_sys::fuzz_target;
use trailerlink::streams::{decapsulate, encapsulate};

fuzz_target!(|data: &[u8]| {
    if let Ok(frames) = decapsulate(data) {
        assert_eq!(decapsulate(&encapsulate(&frames).unwrap()).unwrap(), frames);
    }
});
