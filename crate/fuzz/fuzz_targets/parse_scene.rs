#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(scene) = robolayout::parse_scene(text) {
        let again = robolayout::parse_scene(&scene.to_json()).expect("written scene parses");
        assert_eq!(again.to_json(), scene.to_json());
    }
});
