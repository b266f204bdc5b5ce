#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(layout) = robolayout::parse_layout(text) {
        let again = robolayout::parse_layout(&layout.to_json()).expect("written layout parses");
        assert_eq!(again.to_json(), layout.to_json());
    }
});
