#![no_main]

use libfuzzer_sys::fuzz_target;
use pcaska::harness::parse_verify_file;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_verify_file(text);
    }
});
