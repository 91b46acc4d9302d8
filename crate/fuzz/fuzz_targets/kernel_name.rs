#![no_main]

use libfuzzer_sys::fuzz_target;

// Kernel tags arrive from CLI flags and config files; parsing must never
// panic, including on non-ASCII case-folding edge cases.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = text.parse::<rbf_dd::kernels::KernelKind>();
        let _ = rbf_dd::harness::parse_kernel_list(text);
    }
});
