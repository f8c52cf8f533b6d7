#![no_main]

use libfuzzer_sys::fuzz_target;

// Scenario parsing and validation must never panic on arbitrary input; on
// success the resolved times must honor the documented invariants.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(scenario) = clgrid_cli::Scenario::from_toml_str(text) {
            assert!(!scenario.times.is_empty());
            assert!(scenario.times.windows(2).all(|w| w[0] <= w[1]));
            assert!(scenario.times.iter().all(|t| *t >= 0.0));
            assert!(!scenario.outputs.is_empty());
        }
    }
});
