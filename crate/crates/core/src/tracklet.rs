//! First tracking stage: link proposals in consecutive frames into tracklets
//! using only spatio-temporal consistency under optical flow.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::json;

use crate::assignment::{Matcher, Matching, ScoreMatrix};
use crate::error::{Error, Result};
use crate::flow::{flo_file_name, FlowField};
use crate::proposal::{Proposal, Sequence};

/// A run of proposals in consecutive frames judged to be one object.
#[derive(Debug, Clone, PartialEq)]
pub struct Tracklet {
    pub id: usize,
    /// One proposal per frame, `begin()..=end()`.
    pub proposals: Vec<Proposal>,
    /// Mean of the member embeddings; `None` if any member lacks one.
    pub mean_embedding: Option<Vec<f64>>,
}

impl Tracklet {
    pub fn new(id: usize, proposals: Vec<Proposal>) -> Result<Self> {
        let Some(first) = proposals.first() else {
            return Err(Error::contract("tracklet needs at least one proposal"));
        };
        for (k, p) in proposals.iter().enumerate() {
            if p.frame != first.frame + k {
                return Err(Error::contract("tracklet proposals must be in consecutive frames"));
            }
        }
        let mean_embedding = mean_embedding(&proposals)?;
        Ok(Tracklet {
            id,
            proposals,
            mean_embedding,
        })
    }

    pub fn begin(&self) -> usize {
        self.proposals[0].frame
    }

    pub fn end(&self) -> usize {
        self.proposals[self.proposals.len() - 1].frame
    }

    /// Number of frames spanned.
    pub fn len(&self) -> usize {
        self.proposals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.proposals.is_empty()
    }

    pub fn mean_score(&self) -> f64 {
        self.proposals.iter().map(|p| p.score).sum::<f64>() / self.len() as f64
    }

    pub fn proposal_at(&self, frame: usize) -> Option<&Proposal> {
        frame
            .checked_sub(self.begin())
            .and_then(|k| self.proposals.get(k))
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "id": self.id,
            "b": self.begin(),
            "e": self.end(),
            "proposal_ids": self.proposals.iter().map(|p| p.source_id).collect::<Vec<_>>(),
            "mean_embedding": self.mean_embedding,
        })
    }
}

fn mean_embedding(proposals: &[Proposal]) -> Result<Option<Vec<f64>>> {
    let mut sum: Option<Vec<f64>> = None;
    for p in proposals {
        let Some(e) = &p.embedding else {
            return Ok(None);
        };
        match &mut sum {
            None => sum = Some(e.clone()),
            Some(acc) => {
                if acc.len() != e.len() {
                    return Err(Error::contract("embedding lengths differ within a tracklet"));
                }
                acc.iter_mut().zip(e).for_each(|(a, b)| *a += b);
            }
        }
    }
    let n = proposals.len() as f64;
    Ok(sum.map(|v| v.into_iter().map(|x| x / n).collect()))
}

/// Source of flow fields; `flow(t)` maps frame `t` to `t + 1`.
pub trait FlowSource: Sync {
    fn flow(&self, frame: usize) -> Result<FlowField>;
}

impl FlowSource for [FlowField] {
    fn flow(&self, frame: usize) -> Result<FlowField> {
        self.get(frame)
            .cloned()
            .ok_or_else(|| Error::MissingInput(format!("flow for frames {frame} -> {}", frame + 1)))
    }
}

impl FlowSource for Vec<FlowField> {
    fn flow(&self, frame: usize) -> Result<FlowField> {
        self.as_slice().flow(frame)
    }
}

/// Flow files named `NNNNNN.flo` in one directory, read on demand.
#[derive(Debug, Clone)]
pub struct FlowDir {
    dir: PathBuf,
}

impl FlowDir {
    pub fn new(dir: impl AsRef<Path>) -> Self {
        FlowDir {
            dir: dir.as_ref().to_path_buf(),
        }
    }

    pub fn path_for(&self, frame: usize) -> PathBuf {
        self.dir.join(flo_file_name(frame))
    }
}

impl FlowSource for FlowDir {
    fn flow(&self, frame: usize) -> Result<FlowField> {
        let path = self.path_for(frame);
        if !path.is_file() {
            return Err(Error::MissingInput(format!(
                "flow for frames {frame} -> {} ({})",
                frame + 1,
                path.display()
            )));
        }
        FlowField::read_flo(&path)
    }
}

/// IoU between `p` warped by `flow` and `q`; `q` must be in the frame right after `p`.
pub fn consistency_score(p: &Proposal, q: &Proposal, flow: &FlowField) -> Result<f64> {
    if p.frame + 1 != q.frame {
        return Err(Error::contract(format!(
            "consistency needs consecutive frames, got {} and {}",
            p.frame, q.frame
        )));
    }
    p.mask.warp(flow)?.iou(&q.mask)
}

/// Consistency scores between all proposals of frame `t` (rows) and `t + 1`
/// (columns); scores below `edge_min` are forbidden.
pub fn consistency_matrix(
    earlier: &[Proposal],
    later: &[Proposal],
    flow: &FlowField,
    edge_min: f64,
) -> Result<ScoreMatrix> {
    let mut matrix = ScoreMatrix::new(earlier.len(), later.len());
    for (r, p) in earlier.iter().enumerate() {
        let warped = p.mask.warp(flow)?;
        for (c, q) in later.iter().enumerate() {
            if p.frame + 1 != q.frame {
                return Err(Error::contract("consistency needs consecutive frames"));
            }
            let score = warped.iou(&q.mask)?;
            if score >= edge_min {
                matrix.set(r, c, score)?;
            }
        }
    }
    Ok(matrix)
}

/// Links the (already reduced) proposals of `seq` into tracklets.
///
/// Every proposal ends up in exactly one tracklet. Tracklets are returned
/// sorted by begin frame, then by the `source_id` of their first proposal,
/// with `id` equal to the position in that order.
pub fn build_tracklets(
    seq: &Sequence,
    flows: &(impl FlowSource + ?Sized),
    edge_min: f64,
    matcher: Matcher,
) -> Result<Vec<Tracklet>> {
    let t_count = seq.num_frames();
    for (t, f) in seq.frames.iter().enumerate() {
        if f.frame != t || f.proposals.iter().any(|p| p.frame != t) {
            return Err(Error::contract(format!("frame {t} is mislabelled")));
        }
    }
    let pairs: Vec<usize> = (0..t_count.saturating_sub(1))
        .filter(|&t| !seq.frames[t].is_empty() && !seq.frames[t + 1].is_empty())
        .collect();
    let matchings: Vec<(usize, Matching)> = pairs
        .par_iter()
        .map(|&t| {
            let flow = flows.flow(t)?;
            if flow.dims() != (seq.height, seq.width) {
                return Err(Error::format(
                    format!("flow for frames {t} -> {}", t + 1),
                    format!(
                        "flow is {}x{} but frames are {}x{}",
                        flow.height(),
                        flow.width(),
                        seq.height,
                        seq.width
                    ),
                ));
            }
            let matrix = consistency_matrix(
                &seq.frames[t].proposals,
                &seq.frames[t + 1].proposals,
                &flow,
                edge_min,
            )?;
            Ok((t, matcher.solve(&matrix)))
        })
        .collect::<Vec<Result<_>>>()
        .into_iter()
        .collect::<Result<_>>()?;

    // chains[k] holds (frame, index-in-frame) members.
    let mut chains: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut chain_of: Vec<usize> = Vec::new();
    let mut next_matching = matchings.iter().peekable();
    for t in 0..t_count {
        let matching = match next_matching.peek() {
            Some((mt, _)) if mt + 1 == t => next_matching.next().map(|(_, m)| m),
            _ => None,
        };
        let mut this_chain_of = Vec::with_capacity(seq.frames[t].len());
        for c in 0..seq.frames[t].len() {
            let prev = matching.and_then(|m| m.row_for_col(c));
            let chain = match prev {
                Some(r) => chain_of[r],
                None => {
                    chains.push(Vec::new());
                    chains.len() - 1
                }
            };
            chains[chain].push((t, c));
            this_chain_of.push(chain);
        }
        chain_of = this_chain_of;
    }

    let mut members: Vec<Vec<Proposal>> = chains
        .into_iter()
        .map(|chain| {
            chain
                .into_iter()
                .map(|(t, i)| seq.frames[t].proposals[i].clone())
                .collect()
        })
        .collect();
    members.sort_by_key(|ps| (ps[0].frame, ps[0].source_id));
    members
        .into_iter()
        .enumerate()
        .map(|(id, ps)| Tracklet::new(id, ps))
        .collect()
}
