#![no_main]

use libfuzzer_sys::fuzz_target;
use spirallab::spec::FunctionSpec;
use spirallab::Complex64;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = FunctionSpec::parse(text) {
        if let Ok(h) = spec.build() {
            let _ = h.eval(Complex64::new(0.25, -0.1));
        }
    }
});
