#![no_main]

use gkpca_cli::config::parse_file;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(settings) = parse_file(text) {
        let _ = settings.run_config();
    }
});
