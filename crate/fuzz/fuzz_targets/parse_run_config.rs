#![no_main]

use libfuzzer_sys::fuzz_target;
use wedgewave::config::parse_run_config;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = parse_run_config(text) {
        let again = parse_run_config(&cfg.to_config_string()).expect("canonical form parses");
        assert_eq!(again, cfg);
    }
});
