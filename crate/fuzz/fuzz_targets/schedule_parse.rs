#![no_main]

use libfuzzer_sys::fuzz_target;
use uplift_zero::scarf::scarf_instance;
use uplift_zero::Schedule;

fuzz_target!(|data: &[u8]| {
    let instance = scarf_instance(10.0).expect("built-in fleet is valid");
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(schedule) = Schedule::parse(text, &instance) {
            assert_eq!(schedule.units.len(), instance.units.len());
            let _ = schedule.validate(&instance);
        }
    }
});
