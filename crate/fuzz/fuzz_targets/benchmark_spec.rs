#![no_main]

use genlyap::BenchmarkSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = text.parse::<BenchmarkSpec>() {
        let _ = spec.validate();
        let _ = spec.to_string().parse::<BenchmarkSpec>();
    }
});
