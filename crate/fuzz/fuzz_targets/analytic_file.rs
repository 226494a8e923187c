#![no_main]

use libfuzzer_sys::fuzz_target;
use pcaska::harness::{emit_analytics, parse_analytic_file};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // closed forms are cheap, so evaluate whatever parses
    if let Ok((cfg, grid)) = parse_analytic_file(text) {
        if grid.values.len() <= 64 {
            let _ = emit_analytics(&cfg, &grid);
        }
    }
});
