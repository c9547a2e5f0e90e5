#![no_main]

use clockmap_core::qudit::DenseState;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // small cap so hostile headers cannot allocate much
    if let Ok(state) = DenseState::decode_kdst(data, 1 << 16) {
        assert_eq!(state.encode_kdst(), data);
    }
});
