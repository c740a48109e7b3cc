#![no_main]

use libfuzzer_sys::fuzz_target;
use qdo_core::grouping::{groups_from_json, groups_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(groups) = groups_from_json(s) {
        let back = groups_from_json(&groups_to_json(&groups).unwrap()).expect("own output must decode");
        assert_eq!(back, groups);
    }
});
