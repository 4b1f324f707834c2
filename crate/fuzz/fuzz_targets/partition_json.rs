//! Partition JSON must never panic, and any partition it accepts (contiguous,
//! strictly descending segments) must re-emit and re-parse stably.

#![no_main]

use libfuzzer_sys::fuzz_target;

use lawtraverse::io::{partition_from_json, partition_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(partition) = partition_from_json(text) {
        let emitted = partition_to_json(&partition);
        let reparsed = partition_from_json(&emitted).expect("emitted partition must parse");
        assert_eq!(emitted, partition_to_json(&reparsed));
    }
});
