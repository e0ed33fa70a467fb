#![no_main]

use fiberloom::formats::{parse_amplitudes, write_logical_amplitudes};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(table) = parse_amplitudes(text) {
        if let Ok(state) = table.to_logical() {
            let again = parse_amplitudes(&write_logical_amplitudes(&state)).expect("written listings parse");
            assert_eq!(again.qubits.as_deref(), Some(state.qubits()));
        }
    }
});
