#![no_main]

use hardy_core::disc::DiscPoint;
use hardy_core::models::{model_eval, HardyModel};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(model) = HardyModel::from_json(text) {
            let _ = model_eval(&model, DiscPoint::real(0.25).unwrap());
        }
    }
});
