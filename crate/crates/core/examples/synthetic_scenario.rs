//! Generating a synthetic scenario and writing its files.
//!
//! `cargo run --example synthetic_scenario -- OUT_DIR` writes proposals.json,
//! ground_truth.json and flow/ into OUT_DIR (a temporary directory otherwise).

use vostrack::synth::{generate, NoiseSpec, ObjectSpec, ScenarioSpec};

fn main() -> vostrack::Result<()> {
    let spec = ScenarioSpec {
        seed: 7,
        frames: 12,
        height: 48,
        width: 64,
        embedding_dim: None,
        objects: vec![
            ObjectSpec {
                size: [10, 12],
                trajectory: vec![[0.0, 2.0, 4.0], [11.0, 40.0, 10.0]],
                visible_ranges: Some(vec![[0, 4], [7, 11]]),
            },
            ObjectSpec::fixed([16, 8], 30.0, 28.0),
        ],
        noise: NoiseSpec {
            score_range: [0.5, 1.0],
            embedding_sigma: 0.1,
            dropout_prob: 0.05,
            clutter_rate: 0.5,
        },
    };
    println!("{}", serde_json::to_string(&spec).expect("spec serializes"));
    let scenario = generate(&spec)?;
    println!(
        "{} proposals over {} frames, {} ground-truth tracks",
        scenario.proposals.proposal_count(),
        spec.frames,
        scenario.ground_truth.tracks.len()
    );
    let tmp;
    let dir = match std::env::args_os().nth(1) {
        Some(d) => std::path::PathBuf::from(d),
        None => {
            tmp = tempfile::tempdir().map_err(|e| vostrack::Error::io("tempdir", e))?;
            tmp.path().to_path_buf()
        }
    };
    scenario.write(&dir)?;
    println!("written to {}", dir.display());
    Ok(())
}
