#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vostrack::assignment::ScoreMatrix;
use vostrack::fpc::DensityMode;
use vostrack::synth::{NoiseSpec, ObjectSpec, ScenarioSpec};
use vostrack::{Config, Sequence, TrackingRun};

pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in `lo..hi`.
    pub fn below(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.0.next_u64() % (hi - lo) as u64) as usize
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }
}

/// Random matrix up to `max_dim` per side; `forbid` is the chance an entry is
/// absent. Half the matrices use small integers so ties are common.
pub fn random_matrix(rng: &mut Rng, max_dim: usize, forbid: f64) -> ScoreMatrix {
    let rows = rng.below(1, max_dim + 1);
    let cols = rng.below(1, max_dim + 1);
    let integral = rng.chance(0.5);
    let mut m = ScoreMatrix::new(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            if rng.chance(forbid) {
                continue;
            }
            let s = if integral {
                rng.below(0, 5) as f64
            } else {
                rng.unit() * 2.0 - 0.5
            };
            m.set(r, c, s).unwrap();
        }
    }
    m
}

/// Tracklet description for the reference association.
#[derive(Debug, Clone)]
pub struct RefTracklet {
    pub b: usize,
    pub e: usize,
    pub r: Vec<f64>,
}

/// Straight transliteration of the forest path cutting algorithm: no
/// caching, everything recomputed on every iteration. Tracklets must be
/// ordered by `b`. Returns tracks (ascending member ids) in selection order.
pub fn reference_fpc(
    ls: &[RefTracklet],
    w_v: f64,
    w_t: f64,
    video_len: usize,
    density: DensityMode,
) -> Vec<Vec<usize>> {
    let n = ls.len();
    let dist = |i: usize, j: usize| -> f64 {
        ls[i].r.iter().zip(&ls[j].r).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    };
    let mut d_max = 0.0f64;
    for m in 0..n {
        for k in 0..n {
            d_max = d_max.max(dist(m, k));
        }
    }
    let v = |i: usize, j: usize| if d_max == 0.0 { 1.0 } else { 1.0 - dist(i, j) / d_max };

    // Part 1.
    let mut pred: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let ended: Vec<usize> = (0..n).filter(|&j| ls[j].e < ls[i].b).collect();
        if ended.is_empty() {
            pred[i] = None;
            continue;
        }
        let argmax = |set: &[usize]| -> usize {
            let mut best = set[0];
            for &j in set {
                if v(i, j) > v(i, best) {
                    best = j;
                }
            }
            best
        };
        let mut k = argmax(&ended);
        loop {
            let s: Vec<usize> = (0..n)
                .filter(|&j| ls[j].e < ls[i].b && ls[j].b > ls[k].e && pred[j] == Some(k))
                .collect();
            if s.is_empty() {
                break;
            }
            let others: Vec<usize> = ended.iter().copied().filter(|&j| j != k).collect();
            let l = argmax(&others);
            if s.contains(&l) {
                k = l;
            } else {
                break;
            }
        }
        pred[i] = Some(k);
    }

    // Part 2.
    let mut h: Vec<(usize, BTreeSet<usize>)> = (0..n)
        .filter(|&i| !pred.contains(&Some(i)))
        .map(|leaf| {
            let mut set = BTreeSet::new();
            let mut cur = Some(leaf);
            while let Some(c) = cur {
                set.insert(c);
                cur = pred[c];
            }
            (leaf, set)
        })
        .collect();
    let score = |set: &BTreeSet<usize>| -> f64 {
        let mut cv = 1.0f64;
        for &m in set {
            for &k in set {
                if m != k {
                    cv = cv.min(v(m, k));
                }
            }
        }
        let frames: usize = set.iter().map(|&j| ls[j].e - ls[j].b + 1).sum();
        let ct = match density {
            DensityMode::Normalized => frames as f64 / video_len as f64,
            DensityMode::Raw => frames as f64,
        };
        w_v * cv + w_t * ct
    };
    let mut f = Vec::new();
    while !h.is_empty() {
        let scores: Vec<f64> = h.iter().map(|(_, s)| score(s)).collect();
        let start = |s: &BTreeSet<usize>| s.iter().map(|&j| ls[j].b).min().unwrap();
        let mut k = 0;
        for i in 1..h.len() {
            let better = scores[i] > scores[k]
                || (scores[i] == scores[k]
                    && (start(&h[i].1), h[i].0) < (start(&h[k].1), h[k].0));
            if better {
                k = i;
            }
        }
        let (_, chosen) = h.remove(k);
        for (_, other) in h.iter_mut() {
            *other = other.difference(&chosen).copied().collect();
        }
        h.retain(|(_, s)| !s.is_empty());
        f.push(chosen.into_iter().collect());
    }
    f
}

/// Random tracklet configuration sorted by begin frame. Embeddings are
/// sometimes integral or duplicated to provoke ties.
pub fn random_ref_tracklets(rng: &mut Rng, max_n: usize, video_len: usize) -> Vec<RefTracklet> {
    let n = rng.below(1, max_n + 1);
    let integral = rng.chance(0.3);
    let mut ls: Vec<RefTracklet> = Vec::with_capacity(n);
    for _ in 0..n {
        let b = rng.below(0, video_len);
        let e = (b + rng.below(0, 8)).min(video_len - 1);
        let r: Vec<f64> = if !ls.is_empty() && rng.chance(0.15) {
            ls[rng.below(0, ls.len())].r.clone()
        } else if integral {
            (0..3).map(|_| rng.below(0, 3) as f64).collect()
        } else {
            (0..4).map(|_| rng.unit()).collect()
        };
        ls.push(RefTracklet { b, e, r });
    }
    ls.sort_by_key(|t| t.b);
    ls
}

/// Objects laid out on a grid, five per row, each wandering inside its own
/// cell so masks never touch. Trajectories are integral and waypoints come
/// every ten frames.
pub fn grid_spec(seed: u64, objects: usize, frames: usize, height: u32, width: u32) -> ScenarioSpec {
    let mut rng = Rng::new(seed ^ 0x9e37_79b9_7f4a_7c15);
    let per_row = 5.min(objects.max(1));
    let rows = objects.div_ceil(per_row).max(1);
    let cell_h = height as usize / rows;
    let cell_w = width as usize / per_row;
    let (oh, ow) = (cell_h / 2, cell_w / 2);
    let objects = (0..objects)
        .map(|k| {
            let (top, left) = ((k / per_row) * cell_h, (k % per_row) * cell_w);
            let trajectory = (0..frames.div_ceil(10) + 1)
                .map(|w| {
                    [
                        (w * 10) as f64,
                        (left + rng.below(0, cell_w - ow)) as f64,
                        (top + rng.below(0, cell_h - oh)) as f64,
                    ]
                })
                .collect();
            ObjectSpec {
                size: [oh as u32, ow as u32],
                trajectory,
                visible_ranges: None,
            }
        })
        .collect();
    ScenarioSpec {
        seed,
        frames,
        height,
        width,
        embedding_dim: None,
        objects,
        noise: NoiseSpec::default(),
    }
}

/// Gives every object one invisible gap of 1..=`max_gap` frames away from
/// the sequence ends.
pub fn add_gaps(spec: &mut ScenarioSpec, max_gap: usize, seed: u64) {
    let mut rng = Rng::new(seed);
    let frames = spec.frames;
    for o in &mut spec.objects {
        let len = rng.below(1, max_gap + 1);
        let start = rng.below(5, frames - 5 - len);
        o.visible_ranges = Some(vec![[0, start - 1], [start + len, frames - 1]]);
    }
}

/// Small scenario with free-moving (possibly occluding) objects and random noise.
pub fn random_spec(seed: u64) -> ScenarioSpec {
    let mut rng = Rng::new(seed);
    let (height, width) = (24u32, 32u32);
    let frames = rng.below(1, 13);
    let objects = (0..rng.below(0, 6))
        .map(|_| {
            let h = rng.below(2, 9);
            let w = rng.below(2, 9);
            let trajectory = (0..rng.below(1, 4))
                .map(|i| {
                    [
                        (i * 5) as f64,
                        rng.below(0, width as usize - w + 1) as f64,
                        rng.below(0, height as usize - h + 1) as f64,
                    ]
                })
                .collect();
            let visible_ranges = if rng.chance(0.3) && frames > 2 {
                let a = rng.below(0, frames);
                let b = rng.below(a, frames);
                Some(vec![[a, b]])
            } else {
                None
            };
            ObjectSpec {
                size: [h as u32, w as u32],
                trajectory,
                visible_ranges,
            }
        })
        .collect();
    let lo = 0.05 + 0.9 * rng.unit();
    ScenarioSpec {
        seed,
        frames,
        height,
        width,
        embedding_dim: Some(8),
        objects,
        noise: NoiseSpec {
            score_range: [lo, lo + (1.0 - lo) * rng.unit()],
            embedding_sigma: 0.3 * rng.unit(),
            dropout_prob: 0.2 * rng.unit(),
            clutter_rate: 2.0 * rng.unit(),
        },
    }
}

/// Every structural invariant of a run; returns the first violation.
pub fn check_invariants(seq: &Sequence, run: &TrackingRun, config: &Config) -> Result<(), String> {
    for f in &run.reduced.frames {
        for (i, a) in f.proposals.iter().enumerate() {
            for b in &f.proposals[i + 1..] {
                if a.mask.intersection_area(&b.mask).unwrap() > 0 {
                    return Err(format!("frame {}: clipped proposals overlap", f.frame));
                }
            }
            let raw = seq.frames[f.frame]
                .proposals
                .iter()
                .find(|p| p.source_id == a.source_id)
                .ok_or("reduced proposal has no source")?;
            if !a.mask.is_subset_of(&raw.mask).unwrap() {
                return Err(format!("frame {}: clipped mask grew", f.frame));
            }
        }
    }
    run.output.validate("output").map_err(|e| e.to_string())?;

    let reduced: BTreeSet<(usize, i64)> = run
        .reduced
        .frames
        .iter()
        .flat_map(|f| f.proposals.iter().map(|p| (p.frame, p.source_id)))
        .collect();
    let mut seen = BTreeSet::new();
    for t in &run.tracklets {
        for p in &t.proposals {
            if !seen.insert((p.frame, p.source_id)) {
                return Err("proposal in two tracklets".into());
            }
        }
    }
    if seen != reduced {
        return Err("tracklets do not cover the reduced proposals".into());
    }

    let mut counts = vec![0usize; run.tracklets.len()];
    for c in &run.association.cuts {
        for &i in &c.tracklets {
            counts[i] += 1;
        }
        for (x, &a) in c.tracklets.iter().enumerate() {
            for &b in &c.tracklets[x + 1..] {
                let (ta, tb) = (&run.tracklets[a], &run.tracklets[b]);
                if ta.begin() <= tb.end() && tb.begin() <= ta.end() {
                    return Err("track holds temporally overlapping tracklets".into());
                }
            }
        }
    }
    if counts.iter().any(|&c| c != 1) {
        return Err("tracks do not partition the tracklets".into());
    }
    let limit = if config.max_tracks == 0 { usize::MAX } else { config.max_tracks };
    if run.output.tracks.len() != run.association.cuts.len().min(limit) {
        return Err("wrong number of selected tracks".into());
    }
    Ok(())
}

/// Segments per track id, ignoring saliency.
pub fn segments_by_id(out: &vostrack::TrackOutput) -> BTreeMap<u32, BTreeMap<usize, vostrack::Mask>> {
    out.tracks.iter().map(|t| (t.track_id, t.segments.clone())).collect()
}
