#![no_main]

use libfuzzer_sys::fuzz_target;
use qdo_core::PauliString;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(p) = s.parse::<PauliString>() {
        let back: PauliString = p.to_string().parse().expect("display must re-parse");
        assert_eq!(back, p);
    }
});
