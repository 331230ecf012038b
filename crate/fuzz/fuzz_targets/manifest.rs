#![no_main]

use gkpca::manifest::TraversalManifest;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = TraversalManifest::parse(text) {
        let again = TraversalManifest::parse(&m.to_json()).expect("own output parses");
        assert_eq!(again.points(), m.points());
    }
});
