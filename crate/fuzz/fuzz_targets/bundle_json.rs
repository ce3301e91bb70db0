#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(b) = ttstar::model::load(data) {
        let again = ttstar::model::load(ttstar::model::to_json(&b).as_bytes()).expect("serialized bundle reloads");
        assert_eq!(again.rank, b.rank);
        let _ = ttstar::model::full_report(&b, 1e-9);
    }
});
