//! End-to-end tracking: reduce proposals, build tracklets, associate them
//! into tracks, rank by saliency and assemble the output.

use std::collections::BTreeMap;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::fpc::{associate_tracklets, Association, PredecessorForest};
use crate::output::{OutputTrack, TrackOutput};
use crate::proposal::Sequence;
use crate::saliency::{select_top, RankedTrack, ScoredTrack};
use crate::tracklet::{build_tracklets, FlowSource, Tracklet};

/// Everything the pipeline produced, stage by stage.
#[derive(Debug, Clone)]
pub struct TrackingRun {
    /// Proposals after score filtering, NMS and clipping.
    pub reduced: Sequence,
    pub tracklets: Vec<Tracklet>,
    pub association: Association,
    pub selected: Vec<RankedTrack>,
    pub output: TrackOutput,
}

impl TrackingRun {
    pub fn tracklets_json(&self) -> serde_json::Value {
        serde_json::Value::Array(self.tracklets.iter().map(Tracklet::to_json).collect())
    }

    pub fn cuts_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.association
                .cuts
                .iter()
                .enumerate()
                .map(|(i, c)| c.to_json(i))
                .collect(),
        )
    }
}

/// Runs the pipeline, using a dedicated thread pool when `config.threads > 0`.
/// Output does not depend on the thread count.
pub fn track(seq: &Sequence, flows: &(impl FlowSource + ?Sized), config: &Config) -> Result<TrackingRun> {
    config.validate()?;
    if config.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {} threads: {e}", config.threads)))?;
        pool.install(|| track_in_pool(seq, flows, config))
    } else {
        track_in_pool(seq, flows, config)
    }
}

fn track_in_pool(
    seq: &Sequence,
    flows: &(impl FlowSource + ?Sized),
    config: &Config,
) -> Result<TrackingRun> {
    let reduced = seq.reduce(config.detection_score_min, config.nms_iou)?;
    let tracklets = build_tracklets(&reduced, flows, config.edge_min, config.matcher)?;
    reduced.require_embeddings()?;
    let association = if tracklets.is_empty() {
        Association {
            forest: PredecessorForest {
                predecessors: Vec::new(),
            },
            cuts: Vec::new(),
        }
    } else {
        associate_tracklets(&tracklets, &config.path_scoring(seq.num_frames()))?
    };
    let scored = association
        .cuts
        .iter()
        .map(|c| ScoredTrack::new(&c.tracklets, &tracklets))
        .collect::<Result<Vec<_>>>()?;
    let selected = select_top(scored, config.max_tracks);
    let output = assemble_output(seq, &tracklets, &selected);
    Ok(TrackingRun {
        reduced,
        tracklets,
        association,
        selected,
        output,
    })
}

fn assemble_output(seq: &Sequence, tracklets: &[Tracklet], selected: &[RankedTrack]) -> TrackOutput {
    let tracks = selected
        .iter()
        .map(|r| {
            let segments: BTreeMap<usize, _> = r
                .track
                .tracklet_ids
                .iter()
                .flat_map(|&i| tracklets[i].proposals.iter())
                .map(|p| (p.frame, p.mask.clone()))
                .collect();
            OutputTrack {
                track_id: r.track_id,
                saliency: r.track.saliency,
                segments,
            }
        })
        .collect();
    TrackOutput {
        height: seq.height,
        width: seq.width,
        num_frames: seq.num_frames(),
        tracks,
    }
}
