#![no_main]

use gkpca::ingest::parse_samples;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&column, body)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(body) else { return };
    if let Ok(samples) = parse_samples(text, usize::from(column % 4)) {
        assert!(samples.iter().all(|v| v.is_finite()));
    }
});
