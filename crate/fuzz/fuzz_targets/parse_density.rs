#![no_main]

use libfuzzer_sys::fuzz_target;
use wedgewave::artifacts::{density_to_string, parse_density};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(grid) = parse_density(text) {
        let again = parse_density(&density_to_string(&grid)).expect("written grid parses");
        assert_eq!(again.spec, grid.spec);
        assert_eq!(again.values.len(), grid.values.len());
    }
});
