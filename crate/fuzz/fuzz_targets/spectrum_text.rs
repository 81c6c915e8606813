#![no_main]

use libfuzzer_sys::fuzz_target;
use pistonlab::spectra::Spectrum;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spectrum) = Spectrum::from_text(text) {
        let again = Spectrum::from_text(&spectrum.to_text()).expect("emitted text parses");
        assert_eq!(again, spectrum);
    }
});
