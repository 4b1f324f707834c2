//! The defaults file read from LAWTRAVERSE_CONFIG must never panic, whatever
//! its contents.

#![no_main]

use libfuzzer_sys::fuzz_target;

use lawtraverse_cli::config::Defaults;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let _ = Defaults::from_json(text);
});
