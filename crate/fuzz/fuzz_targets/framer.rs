#![no_main]

use libfuzzer_sys::fuzz_target;
use trailerlink::codec::StreamFramer;

// The first byte picks a chunk size; the rest is the stream.
fuzz_target!(|data: &[u8]| {
    let Some((&chunk, stream)) = data.split_first() else { return };
    let chunk = chunk.max(1) as usize;
    let mut framer = StreamFramer::new();
    let mut total = 0;
    for part in stream.chunks(chunk) {
        framer.push(part);
        loop {
            match framer.next_frame() {
                Ok(Some(frame)) => total += frame.len(),
                Ok(None) => break,
                Err(_) => return,
            }
        }
    }
    assert_eq!(total + framer.buffered(), stream.len());
});
