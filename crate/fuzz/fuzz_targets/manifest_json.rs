#![no_main]

use clockmap_core::io::RunManifest;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(m) = RunManifest::from_json(text) {
            let again = RunManifest::from_json(&m.to_json()).expect("written manifest parses");
            assert_eq!(again.payload_hash, m.payload_hash);
        }
    }
});
