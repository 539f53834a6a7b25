#![no_main]

use libfuzzer_sys::fuzz_target;
use wedgewave::artifacts::{
    parse_series, parse_table, MOMENTUM_HEADER, MOMENTUM_STATS_HEADER, SERIES_HEADER,
};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    for header in [SERIES_HEADER, MOMENTUM_HEADER, MOMENTUM_STATS_HEADER] {
        if let Ok(rows) = parse_table(text, header) {
            let width = header.split(',').count();
            assert!(rows.iter().all(|r| r.len() == width));
        }
    }
    let _ = parse_series(text);
});
