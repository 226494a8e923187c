#![no_main]

use libfuzzer_sys::fuzz_target;
use pcaska::channel::SystemConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // anything that parses must also validate
    if let Ok(cfg) = SystemConfig::from_kv_text(text) {
        cfg.validate().expect("parsed config validates");
    }
});
