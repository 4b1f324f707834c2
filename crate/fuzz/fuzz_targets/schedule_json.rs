//! Schedule JSON must never panic, and any schedule it accepts (including
//! trigger-ordering validation) must re-emit and re-parse stably.

#![no_main]

use libfuzzer_sys::fuzz_target;

use lawtraverse::io::{schedule_from_json, schedule_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(schedule) = schedule_from_json(text) {
        let emitted = schedule_to_json(&schedule);
        let reparsed = schedule_from_json(&emitted).expect("emitted schedule must parse");
        assert_eq!(emitted, schedule_to_json(&reparsed));
    }
});
