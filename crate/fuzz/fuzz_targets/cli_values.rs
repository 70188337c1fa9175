#![no_main]

use libfuzzer_sys::fuzz_target;
use spirallab::spec::{parse_complex, parse_grid, parse_real_list};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_complex(text);
    let _ = parse_real_list(text);
    let _ = parse_grid(text);
});
