#![no_main]

use libfuzzer_sys::fuzz_target;
use wedgewave::artifacts::parse_manifest;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(manifest) = parse_manifest(text) {
        for entry in &manifest.entries {
            assert!(!entry.file.contains('/') && entry.file != "..");
        }
        let again = parse_manifest(&manifest.to_text()).expect("written manifest parses");
        assert_eq!(again.entries.len(), manifest.entries.len());
    }
});
