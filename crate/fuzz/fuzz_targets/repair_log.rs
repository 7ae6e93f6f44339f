#![no_main]

use libfuzzer_sys::fuzz_target;
use vnoise_core::repair::RepairLog;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(log) = RepairLog::from_json(text) {
        let _ = log.is_monotone();
        let again = RepairLog::from_json(&log.to_json().expect("serialize")).expect("round trip");
        assert_eq!(log.edits.len(), again.edits.len());
        assert_eq!(log.phi_trace, again.phi_trace);
    }
});
