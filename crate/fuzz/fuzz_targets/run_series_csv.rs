//! Measurement CSV must never panic, and accepted input must round-trip
//! through the CSV emitter byte-identically on the second pass.

#![no_main]

use libfuzzer_sys::fuzz_target;

use lawtraverse::io::{run_series_from_csv, run_series_to_csv};
use lawtraverse::law::CostUnit;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(series) = run_series_from_csv(text, "F", CostUnit::Flops) {
        let emitted = run_series_to_csv(&series);
        let reparsed =
            run_series_from_csv(&emitted, "F", CostUnit::Flops).expect("emitted CSV must parse");
        assert_eq!(emitted, run_series_to_csv(&reparsed));
    }
});
