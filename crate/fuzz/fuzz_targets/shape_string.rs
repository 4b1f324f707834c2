//! Compact shape strings (`vit:...` / `lm:...`) must never panic, and the
//! canonical rendering of an accepted spec must parse back to the same spec.

#![no_main]

use std::str::FromStr;

use libfuzzer_sys::fuzz_target;

use lawtraverse::flops::ShapeSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = ShapeSpec::from_str(text) {
        let canonical = spec.to_string();
        let reparsed = ShapeSpec::from_str(&canonical).expect("canonical form must parse");
        assert_eq!(reparsed, spec);
        assert_eq!(reparsed.to_string(), canonical);
    }
});
