#![no_main]

use dimple_core::app::{ConfigPatch, RunConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(patch) = ConfigPatch::parse(text, "fuzz.conf") else {
        return;
    };
    let mut cfg = RunConfig::default();
    if patch.apply(&mut cfg).is_err() || cfg.validate().is_err() {
        return;
    }
    // the resolved text of a valid config must read back as a valid config
    let again = ConfigPatch::parse(&cfg.to_config_text(), "resolved").expect("resolved config reparses");
    let mut back = RunConfig::default();
    again.apply(&mut back).expect("resolved config applies");
    back.validate().expect("resolved config validates");
    // trap values go through unit conversions; everything else is exact
    if patch.mass_amu.is_none() && patch.omega_hz.is_none() {
        assert_eq!(back.digest(), cfg.digest());
    }
});
