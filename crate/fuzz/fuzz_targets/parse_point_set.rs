#![no_main]

use hardy_core::io::{parse_point_set, write_point_set};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for closure in [false, true] {
        if let Ok(file) = parse_point_set(text, "fuzz", closure) {
            assert!(!file.set.is_empty());
            let again = parse_point_set(&write_point_set(file.set.points()), "fuzz", closure)
                .expect("written point set parses");
            assert_eq!(again.set.points(), file.set.points());
        }
    }
});
