//! Measurement JSON must never panic, and accepted input must round-trip
//! through the JSON emitter byte-identically on the second pass.

#![no_main]

use libfuzzer_sys::fuzz_target;

use lawtraverse::io::{run_series_from_json, run_series_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(series) = run_series_from_json(text) {
        let emitted = run_series_to_json(&series);
        let reparsed = run_series_from_json(&emitted).expect("emitted JSON must parse");
        assert_eq!(emitted, run_series_to_json(&reparsed));
    }
});
