#![no_main]

use fiberloom::formats::{parse_edge_list, write_edge_list};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = parse_edge_list(text) {
        let again = write_edge_list(&g).expect("parsed graphs carry no local operators");
        assert_eq!(parse_edge_list(&again).expect("written lists parse"), g);
    }
});
