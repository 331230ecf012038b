#![no_main]

use gkpca::archive::{from_bytes, to_bytes};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(model) = from_bytes(data) {
        assert_eq!(to_bytes(&model), data);
    }
});
