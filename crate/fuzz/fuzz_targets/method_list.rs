#![no_main]

use genlyap_cli::parse_method_list;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(methods) = parse_method_list(text) {
        let joined = methods.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(",");
        assert_eq!(parse_method_list(&joined).expect("rendered list parses"), methods);
    }
});
