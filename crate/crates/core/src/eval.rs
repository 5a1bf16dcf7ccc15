//! Region-similarity (Jaccard) evaluation against ground-truth tracks.
//!
//! Protocol: every (ground truth, prediction) pair is scored by its mean
//! per-frame IoU over frames where at least one of the two has a segment.
//! Ground-truth tracks are matched one-to-one to predictions by maximum total
//! score. A ground-truth track's J is its matched pair score (0 when
//! unmatched); extra predictions cost nothing.

use std::fmt::Write as _;

use serde_json::json;

use crate::assignment::{hungarian_max, Matching, ScoreMatrix};
use crate::error::{Error, Result};
use crate::output::{OutputTrack, TrackOutput};

/// Mean per-frame IoU over frames where either track has a nonempty segment.
pub fn track_j(a: &OutputTrack, b: &OutputTrack) -> Result<f64> {
    let frames: std::collections::BTreeSet<usize> = a
        .segments
        .iter()
        .chain(b.segments.iter())
        .filter(|(_, m)| !m.is_empty())
        .map(|(&f, _)| f)
        .collect();
    if frames.is_empty() {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for f in &frames {
        if let (Some(ma), Some(mb)) = (a.segments.get(f), b.segments.get(f)) {
            sum += ma.iou(mb)?;
        }
    }
    Ok(sum / frames.len() as f64)
}

fn check_grid(pred: &TrackOutput, gt: &TrackOutput) -> Result<()> {
    if (pred.height, pred.width) != (gt.height, gt.width) {
        return Err(Error::format(
            "evaluation",
            format!(
                "prediction grid {}x{} differs from ground truth {}x{}",
                pred.height, pred.width, gt.height, gt.width
            ),
        ));
    }
    Ok(())
}

/// Pair scores with ground-truth tracks as rows and predictions as columns.
pub fn score_matrix(pred: &TrackOutput, gt: &TrackOutput) -> Result<ScoreMatrix> {
    check_grid(pred, gt)?;
    let mut m = ScoreMatrix::new(gt.tracks.len(), pred.tracks.len());
    for (r, g) in gt.tracks.iter().enumerate() {
        for (c, p) in pred.tracks.iter().enumerate() {
            m.set(r, c, track_j(g, p)?)?;
        }
    }
    Ok(m)
}

/// Optimal one-to-one matching (rows = ground truth, cols = predictions).
pub fn match_tracks(pred: &TrackOutput, gt: &TrackOutput) -> Result<Matching> {
    Ok(hungarian_max(&score_matrix(pred, gt)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GtScore {
    pub gt_track_id: u32,
    pub pred_track_id: Option<u32>,
    pub j: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub per_track: Vec<GtScore>,
    /// Mean over ground-truth tracks; 1 when there are none.
    pub mean_j: f64,
    pub matched_predictions: usize,
    pub unmatched_predictions: usize,
}

impl EvalReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "mean_j": self.mean_j,
            "matched_predictions": self.matched_predictions,
            "unmatched_predictions": self.unmatched_predictions,
            "per_track": self.per_track.iter().map(|s| json!({
                "gt_track_id": s.gt_track_id,
                "pred_track_id": s.pred_track_id,
                "j": s.j,
            })).collect::<Vec<_>>(),
        })
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{:>8}  {:>8}  {:>8}", "gt", "pred", "J").unwrap();
        for s in &self.per_track {
            let pred = s.pred_track_id.map_or("-".to_string(), |p| p.to_string());
            writeln!(out, "{:>8}  {:>8}  {:>8.4}", s.gt_track_id, pred, s.j).unwrap();
        }
        writeln!(
            out,
            "mean J = {:.4}  ({} matched, {} unmatched predictions)",
            self.mean_j, self.matched_predictions, self.unmatched_predictions
        )
        .unwrap();
        out
    }
}

pub fn mean_j(pred: &TrackOutput, gt: &TrackOutput) -> Result<EvalReport> {
    let scores = score_matrix(pred, gt)?;
    let matching = hungarian_max(&scores);
    let per_track: Vec<GtScore> = gt
        .tracks
        .iter()
        .enumerate()
        .map(|(r, g)| {
            let col = matching.col_for_row(r);
            GtScore {
                gt_track_id: g.track_id,
                pred_track_id: col.map(|c| pred.tracks[c].track_id),
                j: col.and_then(|c| scores.get(r, c)).unwrap_or(0.0),
            }
        })
        .collect();
    let mean_j = if per_track.is_empty() {
        1.0
    } else {
        per_track.iter().map(|s| s.j).sum::<f64>() / per_track.len() as f64
    };
    Ok(EvalReport {
        per_track,
        mean_j,
        matched_predictions: matching.len(),
        unmatched_predictions: pred.tracks.len() - matching.len(),
    })
}
