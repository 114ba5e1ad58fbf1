#![no_main]

use libfuzzer_sys::fuzz_target;
use uplift_zero::model::parse_instance;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(instance) = parse_instance(text) {
            // accepted instances must survive a round trip
            let again = parse_instance(&instance.to_json_string()).expect("reserialized instance parses");
            assert_eq!(again.units.len(), instance.units.len());
        }
    }
});
