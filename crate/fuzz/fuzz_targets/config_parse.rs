#![no_main]

use clockmap_core::io::ConfigLayer;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(layer) = ConfigLayer::from_toml(text) {
            if let Ok(cfg) = layer.resolve() {
                let _ = cfg.temperatures();
                let _ = cfg.betas();
            }
        }
    }
});
