#![no_main]

use libfuzzer_sys::fuzz_target;
use spirallab::spec::{parse_polynomial, polynomial_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(q) = parse_polynomial(text, None) {
        let again = parse_polynomial(&polynomial_to_json(&q).to_string(), Some(q.dim()))
            .expect("serialized polynomial must parse");
        assert_eq!(again, q);
    }
});
