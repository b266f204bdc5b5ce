#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(s) = robolayout::parse_schedule(text) {
        let again = robolayout::parse_schedule(&s.to_json()).expect("written schedule parses");
        assert_eq!(again.to_json(), s.to_json());
    }
});
