#![no_main]
use empath_core::syntax::{parse_problem, serialize_problem};
use empath_core::Problem;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(file) = parse_problem(text) {
        let _ = Problem::from_file(&file);
        let again = parse_problem(&serialize_problem(&file)).expect("serialized problems reparse");
        assert_eq!(again, file);
    }
});
