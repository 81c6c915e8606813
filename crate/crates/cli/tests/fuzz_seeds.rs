//! Replays the fuzz corpus seeds through the same assertions as the fuzz
//! targets, so they run on stable with every `cargo test`.

use std::fs;
use std::path::PathBuf;

use pistonlab::spectra::Spectrum;
use pistonlab_cli::config::parse_config;
use pistonlab_cli::grid::{parse_grid, MAX_GRID_POINTS};

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<(String, String)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| {
            let path = entry.unwrap().path();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            (name, fs::read_to_string(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn spectrum_text_seeds() {
    let mut parsed = 0;
    for (name, text) in seeds("spectrum_text") {
        if let Ok(spectrum) = Spectrum::from_text(&text) {
            let again = Spectrum::from_text(&spectrum.to_text()).unwrap();
            assert_eq!(again, spectrum, "{name}");
            parsed += 1;
        }
    }
    assert!(parsed >= 7);
    assert!(Spectrum::from_text(
        &seeds("spectrum_text")
            .into_iter()
            .find(|(n, _)| n == "unsorted.txt")
            .unwrap()
            .1
    )
    .is_err());
}

#[test]
fn scenario_config_seeds() {
    for (name, text) in seeds("scenario_config") {
        let result = parse_config(&text);
        assert_eq!(result.is_err(), name.starts_with("unknown"), "{name}: {result:?}");
        if let Ok(config) = result {
            config.validate().unwrap();
            config.numerics.pipeline_options().unwrap();
        }
    }
}

#[test]
fn sweep_grid_seeds() {
    for (name, text) in seeds("sweep_grid") {
        match parse_grid(&text) {
            Ok(values) => {
                assert!(!values.is_empty() && values.len() <= MAX_GRID_POINTS, "{name}");
                assert!(values.iter().all(|v| v.is_finite()), "{name}");
            }
            Err(_) => assert!(["too_large", "open_range"].contains(&name.as_str()), "{name}"),
        }
    }
}
