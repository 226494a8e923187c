#![no_main]

use libfuzzer_sys::fuzz_target;
use pcaska::harness::SweepSpec;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(spec) = SweepSpec::parse(text) {
            assert!(spec.validate().is_ok());
            assert_eq!(spec.columns()[0], "axis");
        }
    }
});
