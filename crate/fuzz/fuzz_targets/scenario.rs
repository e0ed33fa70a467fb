#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Err(e) = fiberloom::scenario::parse_scenario(text) {
            assert_eq!(e.exit_code(), 2);
        }
    }
});
