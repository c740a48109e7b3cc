#![no_main]

use libfuzzer_sys::fuzz_target;
use qdo_core::model::parse_separation_grid;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(grid) = parse_separation_grid(s) {
        for r in grid {
            assert!(r.is_infinite() || (r.value().is_finite() && r.value() > 0.0));
        }
    }
});
