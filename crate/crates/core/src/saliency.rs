//! Video saliency of tracks and top-K selection.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::tracklet::Tracklet;

/// Sum over member tracklets of (frames spanned x mean proposal score).
pub fn saliency(members: &[&Tracklet]) -> Result<f64> {
    if members.is_empty() {
        return Err(Error::contract("saliency of an empty track"));
    }
    Ok(members
        .iter()
        .map(|t| t.len() as f64 * t.mean_score())
        .sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredTrack {
    /// Tracklet ids, ascending.
    pub tracklet_ids: Vec<usize>,
    pub start_frame: usize,
    pub saliency: f64,
}

impl ScoredTrack {
    /// Scores the tracklet group `ids` (indices into `tracklets`).
    pub fn new(ids: &[usize], tracklets: &[Tracklet]) -> Result<Self> {
        let members: Vec<&Tracklet> = ids
            .iter()
            .map(|&i| {
                tracklets
                    .get(i)
                    .ok_or_else(|| Error::contract(format!("unknown tracklet {i}")))
            })
            .collect::<Result<_>>()?;
        let saliency = saliency(&members)?;
        let mut tracklet_ids = ids.to_vec();
        tracklet_ids.sort_unstable();
        Ok(ScoredTrack {
            start_frame: members.iter().map(|t| t.begin()).min().unwrap_or(0),
            tracklet_ids,
            saliency,
        })
    }

    fn leading_id(&self) -> usize {
        self.tracklet_ids.first().copied().unwrap_or(usize::MAX)
    }
}

/// A selected track with its output identity.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedTrack {
    /// 1-based, in saliency order.
    pub track_id: u32,
    pub track: ScoredTrack,
}

/// Sorts by descending saliency (ties: earlier start, then lower leading
/// tracklet id), keeps the first `max_tracks` (all when 0), and numbers
/// them from 1.
pub fn select_top(mut tracks: Vec<ScoredTrack>, max_tracks: usize) -> Vec<RankedTrack> {
    tracks.sort_by(|a, b| {
        b.saliency
            .partial_cmp(&a.saliency)
            .unwrap_or(Ordering::Equal)
            .then(a.start_frame.cmp(&b.start_frame))
            .then(a.leading_id().cmp(&b.leading_id()))
    });
    if max_tracks > 0 {
        tracks.truncate(max_tracks);
    }
    tracks
        .into_iter()
        .enumerate()
        .map(|(i, track)| RankedTrack {
            track_id: i as u32 + 1,
            track,
        })
        .collect()
}
