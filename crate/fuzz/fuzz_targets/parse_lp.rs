#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(model) = layout_milp::parse_lp(text) {
        let written = layout_milp::write_lp(&model);
        let again = layout_milp::parse_lp(&written).expect("written model parses");
        assert_eq!(layout_milp::write_lp(&again), written);
    }
});
