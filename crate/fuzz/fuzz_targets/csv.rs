#![no_main]

use gkpca::ingest::{parse_csv, CsvOptions};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&flags, body)) = data.split_first() else { return };
    let opts = CsvOptions {
        has_labels: flags & 1 != 0,
        has_header: flags & 2 != 0,
    };
    if let Ok(ds) = parse_csv(body, opts) {
        assert!(ds.x.is_finite());
        if let Some(l) = &ds.labels {
            assert_eq!(l.len(), ds.x.rows());
        }
    }
});
