#![no_main]

use libfuzzer_sys::fuzz_target;
use vnoise_core::ctpl::CalibrationRecord;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(rec) = CalibrationRecord::from_json(text) {
        let again =
            CalibrationRecord::from_json(&rec.to_json().expect("serialize")).expect("round trip");
        assert_eq!(rec, again);
        rec.params()
            .expect("accepted records carry valid parameters");
    }
});
