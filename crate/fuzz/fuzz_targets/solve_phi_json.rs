#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(input) = ttstar::sylvester::load_solve_phi(data) {
        let _ = ttstar::sylvester::recover_higgs(&input.q, &input.du, 1e-9);
    }
});
