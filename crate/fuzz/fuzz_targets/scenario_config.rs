#![no_main]

use libfuzzer_sys::fuzz_target;
use trailerlink::scenario::Scenario;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(s) = Scenario::parse(text) {
        let _ = s.validate();
        let _ = Scenario::parse(&s.to_config());
    }
});
