#![no_main]

use libfuzzer_sys::fuzz_target;
use vnoise_cli::{ConfigOverrides, Experiment, ExperimentConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(file) = ConfigOverrides::from_json(text) else {
        return;
    };
    let none = ConfigOverrides::default();
    for e in Experiment::ALL {
        if let Ok(cfg) = ExperimentConfig::resolve(e, &file, &none) {
            assert_eq!(cfg.hash().len(), 64);
        }
    }
});
