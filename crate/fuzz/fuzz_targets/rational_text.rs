#![no_main]

use libfuzzer_sys::fuzz_target;

// The exact-decimal/fraction parser sits under every numeric config
// field; it must reject junk without panicking and without allocating
// absurd integers (hostile exponents are capped).
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(r) = naturelab::rational::parse_rational(text) {
            // formatting what we parsed must round-trip
            let printed = naturelab::rational::format_rational(&r);
            let reparsed = naturelab::rational::parse_rational(&printed)
                .expect("formatter output must reparse");
            assert_eq!(r, reparsed);
        }
    }
});
