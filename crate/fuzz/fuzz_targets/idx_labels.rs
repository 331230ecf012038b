#![no_main]

use gkpca::ingest::idx::{labels_to_bytes, parse_idx_labels};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(labels) = parse_idx_labels(data) {
        let back = labels_to_bytes(&labels);
        assert_eq!(&data[..back.len()], back.as_slice());
    }
});
