#![no_main]

use libfuzzer_sys::fuzz_target;
use uplift_zero::amendments::{bundles_to_json, parse_bundles};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(bundles) = parse_bundles(text) {
            let again = parse_bundles(&bundles_to_json(&bundles)).expect("serialized bundles parse");
            assert_eq!(again, bundles);
        }
    }
});
