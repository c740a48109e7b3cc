#![no_main]

use libfuzzer_sys::fuzz_target;
use qdo_core::PauliSum;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(h) = PauliSum::from_json(s) {
        let back = PauliSum::from_json(&h.to_json().unwrap()).expect("own output must decode");
        assert_eq!(back, h);
    }
});
