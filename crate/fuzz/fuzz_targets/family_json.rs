//! Family JSON must never panic on arbitrary input, and anything it accepts
//! must survive an emit → parse → emit cycle byte-identically (labels, shape
//! order, and every f64 down to the last bit).

#![no_main]

use libfuzzer_sys::fuzz_target;

use lawtraverse::io::{family_from_json, family_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(family) = family_from_json(text) {
        let emitted = family_to_json(&family);
        let reparsed = family_from_json(&emitted).expect("emitted family must parse");
        assert_eq!(emitted, family_to_json(&reparsed));
    }
});
