#![no_main]

use gkpca::ingest::idx::parse_idx_images;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(imgs) = parse_idx_images(data) {
        // whatever parses must serialise back to a prefix of the input
        let back = imgs.to_bytes();
        assert_eq!(&data[..back.len()], back.as_slice());
    }
});
