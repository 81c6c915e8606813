#![no_main]

use libfuzzer_sys::fuzz_target;
use pistonlab_cli::config::parse_config;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = parse_config(text) {
        config.validate().expect("parsed configs are valid");
        let _ = config.numerics.pipeline_options();
    }
});
