#![no_main]

use libfuzzer_sys::fuzz_target;
use qdo_core::model::{build_1d_hamiltonian, HamiltonianSpec};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let Ok(spec) = HamiltonianSpec::from_json(s) else { return };
    let back = HamiltonianSpec::from_json(&spec.to_json().unwrap()).expect("own output must decode");
    assert_eq!(back, spec);
    // keep the builder cheap: small registers only
    if spec.num_qubits() <= 8 {
        let _ = build_1d_hamiltonian(&spec);
    }
});
