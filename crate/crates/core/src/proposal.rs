//! Per-frame object proposals and their reduction to a clean, non-overlapping set.
//!
//! Reduction runs three steps per frame: drop low-confidence proposals, mask
//! NMS, then clip the survivors so every pixel belongs to at most one mask.
//! Priority everywhere is descending score, then ascending `source_id`.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{clip_stack, Mask};

#[derive(Debug, Clone, PartialEq)]
pub struct Proposal {
    pub frame: usize,
    pub source_id: i64,
    pub score: f64,
    pub mask: Mask,
    pub embedding: Option<Vec<f64>>,
}

impl Proposal {
    /// Priority order used by NMS and clipping.
    pub fn priority_cmp(&self, other: &Proposal) -> Ordering {
        other
            .score
            .total_cmp(&self.score)
            .then(self.source_id.cmp(&other.source_id))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameProposalSet {
    pub frame: usize,
    pub proposals: Vec<Proposal>,
}

impl FrameProposalSet {
    pub fn new(frame: usize, proposals: Vec<Proposal>) -> Self {
        FrameProposalSet { frame, proposals }
    }

    pub fn len(&self) -> usize {
        self.proposals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.proposals.is_empty()
    }
}

/// Keeps proposals whose score is strictly greater than `min_score`.
pub fn filter_by_score(proposals: &[Proposal], min_score: f64) -> Vec<Proposal> {
    proposals
        .iter()
        .filter(|p| p.score > min_score)
        .cloned()
        .collect()
}

/// Greedy mask NMS: walk proposals in priority order, accepting one iff its
/// IoU with every accepted proposal is at most `iou_threshold`. The result
/// is in priority order.
pub fn nms_suppress(frame_set: &FrameProposalSet, iou_threshold: f64) -> Result<FrameProposalSet> {
    let mut order: Vec<&Proposal> = frame_set.proposals.iter().collect();
    order.sort_by(|a, b| a.priority_cmp(b));
    let mut kept: Vec<Proposal> = Vec::new();
    for p in order {
        let mut accept = true;
        for k in &kept {
            if p.mask.iou(&k.mask)? > iou_threshold {
                accept = false;
                break;
            }
        }
        if accept {
            kept.push(p.clone());
        }
    }
    Ok(FrameProposalSet::new(frame_set.frame, kept))
}

/// Clips overlaps so higher-priority masks sit on top; proposals left with
/// an empty mask are dropped.
pub fn clip_overlaps(frame_set: &FrameProposalSet) -> Result<FrameProposalSet> {
    let mut order: Vec<&Proposal> = frame_set.proposals.iter().collect();
    order.sort_by(|a, b| a.priority_cmp(b));
    let masks: Vec<Mask> = order.iter().map(|p| p.mask.clone()).collect();
    let clipped = clip_stack(&masks)?;
    let proposals = order
        .into_iter()
        .zip(clipped)
        .filter(|(_, m)| !m.is_empty())
        .map(|(p, mask)| Proposal { mask, ..p.clone() })
        .collect();
    Ok(FrameProposalSet::new(frame_set.frame, proposals))
}

/// Score filter, NMS and clipping for one frame.
pub fn reduce_frame(
    frame_set: &FrameProposalSet,
    min_score: f64,
    iou_threshold: f64,
) -> Result<FrameProposalSet> {
    let filtered = FrameProposalSet::new(
        frame_set.frame,
        filter_by_score(&frame_set.proposals, min_score),
    );
    let survivors = nms_suppress(&filtered, iou_threshold)?;
    clip_overlaps(&survivors)
}

/// All proposals of one video: dense frame list `0..num_frames`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    pub height: u32,
    pub width: u32,
    pub frames: Vec<FrameProposalSet>,
}

impl Sequence {
    pub fn empty(height: u32, width: u32, num_frames: usize) -> Self {
        Sequence {
            height,
            width,
            frames: (0..num_frames)
                .map(|t| FrameProposalSet::new(t, Vec::new()))
                .collect(),
        }
    }

    pub fn num_frames(&self) -> usize {
        self.frames.len()
    }

    pub fn proposal_count(&self) -> usize {
        self.frames.iter().map(FrameProposalSet::len).sum()
    }

    /// Reduces every frame independently (in parallel on the current rayon pool).
    pub fn reduce(&self, min_score: f64, iou_threshold: f64) -> Result<Sequence> {
        let frames = self
            .frames
            .par_iter()
            .map(|f| reduce_frame(f, min_score, iou_threshold))
            .collect::<Vec<_>>()
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        Ok(Sequence {
            height: self.height,
            width: self.width,
            frames,
        })
    }

    /// Fails unless every proposal carries an embedding.
    pub fn require_embeddings(&self) -> Result<()> {
        for f in &self.frames {
            if let Some(p) = f.proposals.iter().find(|p| p.embedding.is_none()) {
                return Err(Error::format(
                    format!("frame {}, proposal {}", f.frame, p.source_id),
                    "proposal has no embedding; embeddings are required for tracklet merging",
                ));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str, origin: &str) -> Result<Sequence> {
        let raw: RawSequence = serde_json::from_str(text).map_err(|e| {
            Error::format(origin, format!("line {} column {}: {e}", e.line(), e.column()))
        })?;
        raw.into_sequence(origin)
    }

    pub fn load(path: &Path) -> Result<Sequence> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Sequence::from_json(&text, &path.display().to_string())
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let raw = RawSequence {
            height: self.height,
            width: self.width,
            num_frames: self.num_frames(),
            frames: self
                .frames
                .iter()
                .filter(|f| !f.is_empty())
                .map(|f| RawFrame {
                    frame: f.frame,
                    proposals: f
                        .proposals
                        .iter()
                        .map(|p| RawProposal {
                            id: p.source_id,
                            score: p.score,
                            rle: p.mask.runs().to_vec(),
                            embedding: p.embedding.clone(),
                        })
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_value(raw).expect("proposal file serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RawSequence {
    height: u32,
    width: u32,
    num_frames: usize,
    #[serde(default)]
    frames: Vec<RawFrame>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawFrame {
    frame: usize,
    #[serde(default)]
    proposals: Vec<RawProposal>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawProposal {
    id: i64,
    score: f64,
    rle: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    embedding: Option<Vec<f64>>,
}

impl RawSequence {
    fn into_sequence(self, origin: &str) -> Result<Sequence> {
        let mut seq = Sequence::empty(self.height, self.width, self.num_frames);
        let mut seen_frames = BTreeSet::new();
        let mut embedding_len: Option<usize> = None;
        for (fi, raw_frame) in self.frames.into_iter().enumerate() {
            let loc = format!("{origin}: frames[{fi}]");
            if raw_frame.frame >= self.num_frames {
                return Err(Error::format(
                    loc,
                    format!("frame {} outside 0..{}", raw_frame.frame, self.num_frames),
                ));
            }
            if !seen_frames.insert(raw_frame.frame) {
                return Err(Error::format(loc, format!("frame {} listed twice", raw_frame.frame)));
            }
            let mut ids = BTreeSet::new();
            let mut proposals = Vec::with_capacity(raw_frame.proposals.len());
            for (pi, raw) in raw_frame.proposals.into_iter().enumerate() {
                let loc = format!("{loc}.proposals[{pi}] (id {})", raw.id);
                if !ids.insert(raw.id) {
                    return Err(Error::format(loc, "duplicate proposal id within frame"));
                }
                if !(raw.score.is_finite() && raw.score > 0.0 && raw.score <= 1.0) {
                    return Err(Error::format(loc, format!("score {} not in (0, 1]", raw.score)));
                }
                let mask = Mask::from_runs(self.height, self.width, &raw.rle)
                    .map_err(|e| Error::format(loc.clone(), e.to_string()))?;
                if let Some(emb) = &raw.embedding {
                    if emb.iter().any(|v| !v.is_finite()) {
                        return Err(Error::format(loc, "embedding has non-finite values"));
                    }
                    match embedding_len {
                        None => embedding_len = Some(emb.len()),
                        Some(n) if n != emb.len() => {
                            return Err(Error::format(
                                loc,
                                format!("embedding length {} differs from {n}", emb.len()),
                            ))
                        }
                        Some(_) => {}
                    }
                }
                proposals.push(Proposal {
                    frame: raw_frame.frame,
                    source_id: raw.id,
                    score: raw.score,
                    mask,
                    embedding: raw.embedding,
                });
            }
            seq.frames[raw_frame.frame].proposals = proposals;
        }
        Ok(seq)
    }
}
