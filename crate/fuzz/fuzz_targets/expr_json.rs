#![no_main]

use libfuzzer_sys::fuzz_target;
use uplift_zero::model::UnitSchedule;
use uplift_zero::Expr;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(e) = Expr::from_json(text) {
            let back = Expr::from_json(&e.to_json()).expect("serialized expression parses");
            assert_eq!(back, e);
            let _ = e.to_string();
            let _ = e.eval(&UnitSchedule::point(1, 1.0), 1e-7);
        }
    }
});
