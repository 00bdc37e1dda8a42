#![no_main]

use libfuzzer_sys::fuzz_target;

// Schema validation of experiment configs on arbitrary bytes. Parsing is
// filesystem-free by construction (problem-file references are resolved
// in a separate step), so this is safe to hammer.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = naturelab::config::RawExperimentConfig::from_json_str(text);
    }
});
