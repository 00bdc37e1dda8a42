#![no_main]

use libfuzzer_sys::fuzz_target;

// The problem-file loader must never panic on hostile input: reject with
// an error or accept a well-formed matrix, nothing else.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = naturelab::problem::DecisionProblem::from_json_str(text);
    }
});
