//! End to end through files: synthesize, track, evaluate and render, using
//! the same entry points as the `vostrack` binary.

use vostrack::cli;
use vostrack::synth::{NoiseSpec, ObjectSpec, ScenarioSpec};

fn main() -> vostrack::Result<()> {
    let tmp = tempfile::tempdir().map_err(|e| vostrack::Error::io("tempdir", e))?;
    let dir = tmp.path();
    let spec = ScenarioSpec {
        seed: 3,
        frames: 20,
        height: 60,
        width: 90,
        embedding_dim: None,
        objects: (0..3)
            .map(|k| ObjectSpec {
                size: [12, 14],
                trajectory: vec![[0.0, 5.0 + 25.0 * k as f64, 5.0], [19.0, 10.0 + 25.0 * k as f64, 40.0]],
                visible_ranges: Some(vec![[0, 8 + k], [12 + k, 19]]),
            })
            .collect(),
        noise: NoiseSpec {
            embedding_sigma: 0.05,
            clutter_rate: 1.0,
            ..NoiseSpec::default()
        },
    };
    let spec_path = dir.join("spec.json");
    std::fs::write(&spec_path, serde_json::to_string(&spec).expect("spec serializes"))
        .map_err(|e| vostrack::Error::io(&spec_path, e))?;

    let scenario = dir.join("scenario");
    cli::cmd_synth(&spec_path, &scenario)?;
    let tracks = dir.join("tracks.json");
    let run = cli::cmd_track(
        &scenario.join("proposals.json"),
        &scenario.join("flow"),
        None,
        &tracks,
        Some(&dir.join("debug")),
    )?;
    println!(
        "{} tracklets merged into {} tracks",
        run.tracklets.len(),
        run.association.cuts.len()
    );
    let report = cli::cmd_eval(&tracks, &scenario.join("ground_truth.json"), None)?;
    print!("{}", report.table());
    cli::cmd_render(&tracks, &dir.join("renders"))?;
    println!("rendered {} frames", std::fs::read_dir(dir.join("renders")).map_or(0, |d| d.count()));
    Ok(())
}
