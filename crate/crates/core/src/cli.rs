//! The four commands behind the `vostrack` binary. Each reads its inputs,
//! computes everything in memory, and only then writes outputs, so a failure
//! never leaves a partial file behind.

use std::fs;
use std::path::Path;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::eval::{mean_j, EvalReport};
use crate::output::{write_json, TrackOutput};
use crate::pipeline::{track, TrackingRun};
use crate::proposal::Sequence;
use crate::synth::{generate, ScenarioSpec};
use crate::tracklet::FlowDir;

/// Tracks `proposals` with flow from `flow_dir`; the config file is optional
/// (defaults apply without one). `debug_dir` receives `tracklets.json`,
/// `forest.json` and `cuts.json`.
pub fn cmd_track(
    proposals: &Path,
    flow_dir: &Path,
    config: Option<&Path>,
    out: &Path,
    debug_dir: Option<&Path>,
) -> Result<TrackingRun> {
    let config = match config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let seq = Sequence::load(proposals)?;
    let run = track(&seq, &FlowDir::new(flow_dir), &config)?;
    if let Some(dir) = debug_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_json(&dir.join("tracklets.json"), &run.tracklets_json())?;
        write_json(&dir.join("forest.json"), &run.association.forest.to_json())?;
        write_json(&dir.join("cuts.json"), &run.cuts_json())?;
    }
    run.output.save(out)?;
    Ok(run)
}

pub fn cmd_eval(pred: &Path, gt: &Path, report_out: Option<&Path>) -> Result<EvalReport> {
    let pred = TrackOutput::load(pred)?;
    let gt = TrackOutput::load(gt)?;
    let report = mean_j(&pred, &gt)?;
    if let Some(p) = report_out {
        write_json(p, &report.to_json())?;
    }
    Ok(report)
}

pub fn cmd_synth(spec: &Path, out_dir: &Path) -> Result<()> {
    let spec = ScenarioSpec::load(spec)?;
    let scenario = generate(&spec)?;
    scenario.write(out_dir)
}

pub fn cmd_render(tracks: &Path, out_dir: &Path) -> Result<()> {
    TrackOutput::load(tracks)?.render_pgm(out_dir)
}
