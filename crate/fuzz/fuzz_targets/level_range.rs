#![no_main]

use libfuzzer_sys::fuzz_target;

// `--levels` ranges like `7:10` must parse or fail cleanly; watch for
// integer overflow and empty/reversed ranges.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = rbf_dd::harness::parse_level_range(text);
    }
});
