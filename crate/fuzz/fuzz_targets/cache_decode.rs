#![no_main]

use dimple_core::spectrum::decode_record;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(r) = decode_record(text) {
        assert_eq!(r.xis.len(), r.zones.len());
        assert!(r.xis.iter().all(|x| x.is_finite()));
        assert!(r.xis.windows(2).all(|w| w[0] < w[1]));
    }
});
