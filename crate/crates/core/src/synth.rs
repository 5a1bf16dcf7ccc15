//! Deterministic synthetic scenarios: moving rectangles with exact flow,
//! noisy proposals, clustered embeddings, and ground truth.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64(seed)`. Uniform floats are `(next_u64 >> 11) * 2^-53`;
//! normals use the Box-Muller cosine branch on two uniforms. Draw order is
//! fixed: for each frame, each object in list order draws
//! `dropout, score, noise[0..dim]`; then the clutter count draws one uniform
//! and each clutter proposal draws `height, width, top, left, score,
//! centroid[0..dim]`. Every draw happens whether or not its result is used,
//! so changing one noise knob never reshuffles the others.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{flo_file_name, FlowField};
use crate::mask::Mask;
use crate::output::{write_atomic, write_json, OutputTrack, TrackOutput};
use crate::proposal::{FrameProposalSet, Proposal, Sequence};
use crate::tracklet::FlowSource;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub seed: u64,
    pub frames: usize,
    pub height: u32,
    pub width: u32,
    /// Defaults to `max(16, objects.len())`.
    #[serde(default)]
    pub embedding_dim: Option<usize>,
    #[serde(default)]
    pub objects: Vec<ObjectSpec>,
    #[serde(default)]
    pub noise: NoiseSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    /// Rectangle `[height, width]` in pixels.
    pub size: [u32; 2],
    /// Waypoints `[frame, x, y]` of the top-left corner, by increasing frame.
    /// Positions are linearly interpolated, held constant outside the
    /// waypoint range, and rounded to whole pixels.
    pub trajectory: Vec<[f64; 3]>,
    /// Inclusive `[start, end]` frame ranges where the object is visible.
    /// Absent means visible throughout.
    #[serde(default)]
    pub visible_ranges: Option<Vec<[usize; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    #[serde(default = "default_score_range")]
    pub score_range: [f64; 2],
    /// Embedding noise norm relative to the unit distance between identities.
    #[serde(default)]
    pub embedding_sigma: f64,
    #[serde(default)]
    pub dropout_prob: f64,
    /// Expected spurious proposals per frame.
    #[serde(default)]
    pub clutter_rate: f64,
}

fn default_score_range() -> [f64; 2] {
    [0.9, 0.9]
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            score_range: default_score_range(),
            embedding_sigma: 0.0,
            dropout_prob: 0.0,
            clutter_rate: 0.0,
        }
    }
}

impl ObjectSpec {
    /// Static object at (`x`, `y`), visible throughout.
    pub fn fixed(size: [u32; 2], x: f64, y: f64) -> Self {
        ObjectSpec {
            size,
            trajectory: vec![[0.0, x, y]],
            visible_ranges: None,
        }
    }

    /// Top-left corner `(row, col)` at `frame`.
    pub fn position(&self, frame: usize) -> (i64, i64) {
        let t = frame as f64;
        let wp = &self.trajectory;
        let (x, y) = if t <= wp[0][0] {
            (wp[0][1], wp[0][2])
        } else if t >= wp[wp.len() - 1][0] {
            (wp[wp.len() - 1][1], wp[wp.len() - 1][2])
        } else {
            let k = wp.windows(2).position(|w| t >= w[0][0] && t <= w[1][0]).unwrap();
            let (a, b) = (wp[k], wp[k + 1]);
            let s = (t - a[0]) / (b[0] - a[0]);
            (a[1] + s * (b[1] - a[1]), a[2] + s * (b[2] - a[2]))
        };
        (y.round() as i64, x.round() as i64)
    }

    pub fn visible(&self, frame: usize) -> bool {
        match &self.visible_ranges {
            None => true,
            Some(ranges) => ranges.iter().any(|r| r[0] <= frame && frame <= r[1]),
        }
    }
}

impl ScenarioSpec {
    pub fn embedding_dim(&self) -> usize {
        self.embedding_dim.unwrap_or(self.objects.len().max(16))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Scenario(msg));
        if self.frames == 0 || self.height == 0 || self.width == 0 {
            return bad("frames, height and width must be positive".into());
        }
        if self.embedding_dim() < self.objects.len() {
            return bad(format!(
                "embedding_dim {} is smaller than the number of objects {}",
                self.embedding_dim(),
                self.objects.len()
            ));
        }
        let n = &self.noise;
        let [lo, hi] = n.score_range;
        if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
            return bad(format!("score_range [{lo}, {hi}] must satisfy 0 < lo <= hi <= 1"));
        }
        if !(n.embedding_sigma.is_finite() && n.embedding_sigma >= 0.0) {
            return bad("embedding_sigma must be finite and non-negative".into());
        }
        if !(0.0..=1.0).contains(&n.dropout_prob) {
            return bad("dropout_prob must be in [0, 1]".into());
        }
        if !(n.clutter_rate.is_finite() && n.clutter_rate >= 0.0) {
            return bad("clutter_rate must be finite and non-negative".into());
        }
        for (k, o) in self.objects.iter().enumerate() {
            if o.size[0] == 0 || o.size[1] == 0 {
                return bad(format!("object {k}: size must be positive"));
            }
            if o.trajectory.is_empty() {
                return bad(format!("object {k}: trajectory needs at least one waypoint"));
            }
            if o.trajectory.iter().flatten().any(|v| !v.is_finite()) {
                return bad(format!("object {k}: trajectory has non-finite values"));
            }
            if o.trajectory.windows(2).any(|w| w[0][0] >= w[1][0]) {
                return bad(format!("object {k}: waypoint frames must increase"));
            }
            for r in o.visible_ranges.iter().flatten() {
                if r[0] > r[1] || r[1] >= self.frames {
                    return bad(format!(
                        "object {k}: visible range [{}, {}] outside 0..{}",
                        r[0], r[1], self.frames
                    ));
                }
            }
            for t in (0..self.frames).filter(|&t| o.visible(t)) {
                let (row, col) = o.position(t);
                if row < 0
                    || col < 0
                    || row + o.size[0] as i64 > self.height as i64
                    || col + o.size[1] as i64 > self.width as i64
                {
                    return bad(format!("object {k} leaves the grid at frame {t}"));
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str, origin: &str) -> Result<ScenarioSpec> {
        let spec: ScenarioSpec = serde_json::from_str(text)
            .map_err(|e| Error::Scenario(format!("{origin}: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<ScenarioSpec> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Scenario(format!("{}: {e}", path.display())))?;
        ScenarioSpec::from_json(&text, &path.display().to_string())
    }

    fn object_rect(&self, k: usize, frame: usize) -> Mask {
        let o = &self.objects[k];
        let (row, col) = o.position(frame);
        Mask::rect(self.height, self.width, row, col, o.size[0], o.size[1])
    }

    /// Ground-truth mask of every object at `frame` (later objects occlude earlier ones).
    pub fn frame_masks(&self, frame: usize) -> Vec<Mask> {
        let mut covered = Mask::empty(self.height, self.width);
        let mut masks = vec![Mask::empty(self.height, self.width); self.objects.len()];
        for k in (0..self.objects.len()).rev() {
            if !self.objects[k].visible(frame) {
                continue;
            }
            let rect = self.object_rect(k, frame);
            masks[k] = rect.difference(&covered).expect("same grid");
            covered = covered.union(&rect).expect("same grid");
        }
        masks
    }

    /// Exact flow from `frame` to `frame + 1`: each visible object's pixels
    /// carry its displacement, background is zero.
    pub fn flow(&self, frame: usize) -> FlowField {
        let mut flow = FlowField::zeros(self.height, self.width);
        for (k, mask) in self.frame_masks(frame).iter().enumerate() {
            let (r0, c0) = self.objects[k].position(frame);
            let (r1, c1) = self.objects[k].position(frame + 1);
            let (dx, dy) = ((c1 - c0) as f32, (r1 - r0) as f32);
            for (row, col) in mask.pixels() {
                flow.set(row, col, dx, dy);
            }
        }
        flow
    }
}

/// Lazily computed exact flow of a scenario.
impl FlowSource for ScenarioSpec {
    fn flow(&self, frame: usize) -> Result<FlowField> {
        if frame + 1 >= self.frames {
            return Err(Error::MissingInput(format!(
                "flow for frames {frame} -> {}",
                frame + 1
            )));
        }
        Ok(ScenarioSpec::flow(self, frame))
    }
}

struct Draws {
    rng: ChaCha8Rng,
}

impl Draws {
    fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `lo..=hi`.
    fn int(&mut self, lo: u32, hi: u32) -> u32 {
        let span = (hi - lo) as f64 + 1.0;
        lo + ((self.uniform() * span) as u32).min(hi - lo)
    }
}

/// A generated scenario: proposals, ground truth, and the spec (which also
/// serves the flow fields on demand).
#[derive(Debug, Clone)]
pub struct Scenario {
    pub spec: ScenarioSpec,
    pub proposals: Sequence,
    pub ground_truth: TrackOutput,
}

impl Scenario {
    pub fn flows(&self) -> Vec<FlowField> {
        (0..self.spec.frames.saturating_sub(1))
            .map(|t| self.spec.flow(t))
            .collect()
    }

    /// Writes `proposals.json`, `ground_truth.json` and `flow/NNNNNN.flo`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let flow_dir = dir.join("flow");
        fs::create_dir_all(&flow_dir).map_err(|e| Error::io(&flow_dir, e))?;
        write_json(&dir.join("proposals.json"), &self.proposals.to_json_value())?;
        write_json(&dir.join("ground_truth.json"), &self.ground_truth.to_json_value())?;
        for t in 0..self.spec.frames.saturating_sub(1) {
            write_atomic(&flow_dir.join(flo_file_name(t)), &self.spec.flow(t).to_flo_bytes())?;
        }
        Ok(())
    }
}

/// Identity `k`'s embedding centroid: `e_k / sqrt(2)`, so distinct
/// identities are exactly distance 1 apart.
fn centroid(k: usize, dim: usize) -> Vec<f64> {
    let mut c = vec![0.0; dim];
    c[k] = std::f64::consts::FRAC_1_SQRT_2;
    c
}

pub fn generate(spec: &ScenarioSpec) -> Result<Scenario> {
    spec.validate()?;
    let dim = spec.embedding_dim();
    let noise = &spec.noise;
    let per_component = noise.embedding_sigma / (dim as f64).sqrt();
    let mut draws = Draws {
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
    };
    let (h, w) = (spec.height, spec.width);
    let mut proposals = Sequence::empty(h, w, spec.frames);
    let mut gt_segments: Vec<BTreeMap<usize, Mask>> = vec![BTreeMap::new(); spec.objects.len()];
    let clutter_side = (h.min(w) / 10).max(2).min(h.min(w));

    for t in 0..spec.frames {
        let mut frame_props = Vec::new();
        let mut next_id = 0i64;
        for (k, mask) in spec.frame_masks(t).into_iter().enumerate() {
            let dropped = draws.uniform() < noise.dropout_prob;
            let score = draws.range(noise.score_range[0], noise.score_range[1]);
            let mut embedding = centroid(k, dim);
            for v in embedding.iter_mut() {
                *v += per_component * draws.normal();
            }
            if mask.is_empty() {
                continue;
            }
            gt_segments[k].insert(t, mask.clone());
            if !dropped {
                frame_props.push(Proposal {
                    frame: t,
                    source_id: next_id,
                    score,
                    mask,
                    embedding: Some(embedding),
                });
            }
            next_id += 1;
        }
        let whole = noise.clutter_rate.floor();
        let extra = draws.uniform() < noise.clutter_rate - whole;
        let count = whole as usize + extra as usize;
        for _ in 0..count {
            let ch = draws.int(1, clutter_side);
            let cw = draws.int(1, clutter_side);
            let top = draws.int(0, h - ch);
            let left = draws.int(0, w - cw);
            let score = draws.range(noise.score_range[0], noise.score_range[1]);
            let mut embedding: Vec<f64> = (0..dim).map(|_| draws.normal()).collect();
            let norm = embedding.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                embedding
                    .iter_mut()
                    .for_each(|v| *v *= std::f64::consts::FRAC_1_SQRT_2 / norm);
            }
            frame_props.push(Proposal {
                frame: t,
                source_id: next_id,
                score,
                mask: Mask::rect(h, w, top as i64, left as i64, ch, cw),
                embedding: Some(embedding),
            });
            next_id += 1;
        }
        proposals.frames[t] = FrameProposalSet::new(t, frame_props);
    }

    let ground_truth = TrackOutput {
        height: h,
        width: w,
        num_frames: spec.frames,
        tracks: gt_segments
            .into_iter()
            .enumerate()
            .filter(|(_, segs)| !segs.is_empty())
            .map(|(k, segments)| OutputTrack {
                track_id: k as u32 + 1,
                saliency: 0.0,
                segments,
            })
            .collect(),
    };
    Ok(Scenario {
        spec: spec.clone(),
        proposals,
        ground_truth,
    })
}

/// Identity-consistency of predictions against ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct PurityReport {
    /// `(ground-truth track id, purity)`.
    pub per_object: Vec<(u32, f64)>,
    pub mean: f64,
}

/// Each prediction is assigned to the ground-truth identity it hits most
/// often (a hit is a frame with IoU >= 0.5; ties go to the earlier ground
/// truth track). An object's purity is the hit count of its best assigned
/// prediction over its visible frames. Objects that are never visible are
/// skipped.
pub fn purity(pred: &TrackOutput, gt: &TrackOutput) -> Result<PurityReport> {
    if (pred.height, pred.width) != (gt.height, gt.width) {
        return Err(Error::format("purity", "prediction and ground truth grids differ"));
    }
    let hits = |p: &OutputTrack, g: &OutputTrack| -> Result<usize> {
        let mut n = 0;
        for (f, gm) in &g.segments {
            if let Some(pm) = p.segments.get(f) {
                if pm.iou(gm)? >= 0.5 {
                    n += 1;
                }
            }
        }
        Ok(n)
    };
    let mut best = vec![0usize; gt.tracks.len()];
    for p in &pred.tracks {
        let mut owner: Option<(usize, usize)> = None;
        for (gi, g) in gt.tracks.iter().enumerate() {
            let h = hits(p, g)?;
            if h > 0 && owner.is_none_or(|(_, bh)| h > bh) {
                owner = Some((gi, h));
            }
        }
        if let Some((gi, h)) = owner {
            best[gi] = best[gi].max(h);
        }
    }
    let per_object: Vec<(u32, f64)> = gt
        .tracks
        .iter()
        .zip(&best)
        .filter_map(|(g, &b)| {
            let visible = g.segments.values().filter(|m| !m.is_empty()).count();
            (visible > 0).then(|| (g.track_id, b as f64 / visible as f64))
        })
        .collect();
    let mean = if per_object.is_empty() {
        0.0
    } else {
        per_object.iter().map(|(_, p)| p).sum::<f64>() / per_object.len() as f64
    };
    Ok(PurityReport { per_object, mean })
}
