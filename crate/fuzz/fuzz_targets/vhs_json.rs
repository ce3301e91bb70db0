#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(v) = ttstar::hodge::load_vhs(data) {
        let _ = ttstar::hodge::vhs_to_ttstar(&v.grading, &v.k, v.weight, 1e-9);
    }
});
