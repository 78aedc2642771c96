#![no_main]

use genlyap::io::{read_matrix_market_with_limit, write_matrix_market};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = read_matrix_market_with_limit(text, 1 << 16) {
        let back = read_matrix_market_with_limit(&write_matrix_market(&m), 1 << 16).expect("written matrix parses");
        assert_eq!(back, m);
    }
});
