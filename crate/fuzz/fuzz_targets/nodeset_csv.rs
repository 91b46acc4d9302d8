#![no_main]

use libfuzzer_sys::fuzz_target;

// The CSV node-set importer must reject malformed input with an error, never
// a panic: bad floats, ragged rows, duplicate points, non-finite values,
// unknown header keys.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = rbf_dd::geometry::NodeSet::from_csv_str(text);
    }
});
