#![no_main]

use libfuzzer_sys::fuzz_target;
use spirallab::spec::GeneratorSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = GeneratorSpec::parse(text) {
        let _ = spec.raw_field();
    }
});
