//! Second tracking stage: Forest Path Cutting.
//!
//! Each tracklet picks one optimal predecessor among the tracklets that end
//! before it starts, which turns the tracklets into a forest. Every
//! root-to-leaf path is a track hypothesis. The best-scoring path is then
//! cut out repeatedly: it becomes a track, its tracklets are removed from all
//! other paths, and the remaining paths are rescored.
//!
//! The algorithms here only need tracklet spans and a similarity matrix, so
//! they are expressed over [`Span`] and indices; index `i` is tracklet `i`.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde_json::json;

use crate::error::{Error, Result};
use crate::tracklet::Tracklet;

/// Inclusive frame interval of a tracklet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Span {
    pub begin: usize,
    pub end: usize,
}

impl Span {
    pub fn new(begin: usize, end: usize) -> Self {
        assert!(end >= begin, "span ends before it begins");
        Span { begin, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.begin + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.begin <= other.end && other.begin <= self.end
    }
}

impl From<&Tracklet> for Span {
    fn from(t: &Tracklet) -> Self {
        Span::new(t.begin(), t.end())
    }
}

/// Pairwise visual similarity `1 - d(i, j) / d_max` over tracklet mean
/// embeddings, where `d_max` is the largest pairwise L2 distance. When every
/// embedding is identical the matrix is all ones.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn from_embeddings(embeddings: &[Vec<f64>]) -> Result<Self> {
        let n = embeddings.len();
        if let Some(first) = embeddings.first() {
            if embeddings.iter().any(|e| e.len() != first.len()) {
                return Err(Error::contract("embeddings have different lengths"));
            }
        }
        let mut dist = vec![0.0f64; n * n];
        let mut d_max = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = embeddings[i]
                    .iter()
                    .zip(&embeddings[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                dist[i * n + j] = d;
                dist[j * n + i] = d;
                d_max = d_max.max(d);
            }
        }
        let values = if d_max > 0.0 {
            dist.iter().map(|d| 1.0 - d / d_max).collect()
        } else {
            vec![1.0; n * n]
        };
        Ok(SimilarityMatrix { n, values })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }
}

/// Similarity over the tracklets' mean embeddings.
pub fn visual_similarity(tracklets: &[Tracklet]) -> Result<SimilarityMatrix> {
    let embeddings = tracklets
        .iter()
        .map(|t| {
            t.mean_embedding.clone().ok_or_else(|| {
                Error::contract(format!("tracklet {} has no mean embedding", t.id))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SimilarityMatrix::from_embeddings(&embeddings)
}

/// Optimal predecessor of every tracklet, or `None` for roots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredecessorForest {
    pub predecessors: Vec<Option<usize>>,
}

impl PredecessorForest {
    pub fn len(&self) -> usize {
        self.predecessors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predecessors.is_empty()
    }

    /// Tracklets that are nobody's predecessor.
    pub fn leaves(&self) -> Vec<usize> {
        let mut has_successor = vec![false; self.len()];
        for p in self.predecessors.iter().flatten() {
            has_successor[*p] = true;
        }
        (0..self.len()).filter(|&i| !has_successor[i]).collect()
    }

    /// `{ "<tracklet id>": predecessor id or null }`.
    pub fn to_json(&self) -> serde_json::Value {
        let map: BTreeMap<String, Option<usize>> = self
            .predecessors
            .iter()
            .enumerate()
            .map(|(i, p)| (i.to_string(), *p))
            .collect();
        json!(map)
    }
}

fn argmax_by<I: Iterator<Item = usize>>(candidates: I, key: impl Fn(usize) -> f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for j in candidates {
        let v = key(j);
        // Strictly greater keeps the lowest index on ties.
        if best.is_none_or(|(_, bv)| v > bv) {
            best = Some((j, v));
        }
    }
    best.map(|(j, _)| j)
}

/// Chooses an optimal predecessor for every tracklet. `spans` must be
/// sorted by begin frame.
///
/// For tracklet `i`, the initial guess `k` is the most similar tracklet
/// ending before `i` begins. While some tracklet between `k` and `i` has `k`
/// as its own predecessor, the most similar candidate other than `k` is
/// examined: if it is one of those in-between successors of `k` it becomes
/// the new `k`, otherwise the search stops.
pub fn build_forest(spans: &[Span], similarity: &SimilarityMatrix) -> Result<PredecessorForest> {
    let n = spans.len();
    if similarity.len() != n {
        return Err(Error::contract(format!(
            "similarity matrix is {0}x{0} for {n} tracklets",
            similarity.len()
        )));
    }
    if spans.windows(2).any(|w| w[0].begin > w[1].begin) {
        return Err(Error::contract("tracklets must be sorted by begin frame"));
    }
    let mut predecessors: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let b_i = spans[i].begin;
        let candidates: Vec<usize> = (0..n).filter(|&j| spans[j].end < b_i).collect();
        let Some(mut k) = argmax_by(candidates.iter().copied(), |j| similarity.get(i, j)) else {
            continue;
        };
        loop {
            let in_between_successor =
                |j: usize| spans[j].begin > spans[k].end && predecessors[j] == Some(k);
            if !candidates.iter().any(|&j| in_between_successor(j)) {
                break;
            }
            let l = argmax_by(candidates.iter().copied().filter(|&j| j != k), |j| {
                similarity.get(i, j)
            });
            match l {
                Some(l) if in_between_successor(l) => k = l,
                _ => break,
            }
        }
        predecessors[i] = Some(k);
    }
    Ok(PredecessorForest { predecessors })
}

/// A root-to-leaf path (or what remains of it after cuts).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathHypothesis {
    pub leaf: usize,
    /// Member tracklet ids, ascending.
    pub members: Vec<usize>,
}

/// One path per leaf, holding the leaf and its full predecessor chain, in leaf order.
pub fn enumerate_paths(forest: &PredecessorForest) -> Vec<PathHypothesis> {
    forest
        .leaves()
        .into_iter()
        .map(|leaf| {
            let mut members = vec![leaf];
            let mut cur = leaf;
            while let Some(p) = forest.predecessors[cur] {
                members.push(p);
                cur = p;
            }
            members.sort_unstable();
            PathHypothesis { leaf, members }
        })
        .collect()
}

/// How temporal coverage enters the path score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DensityMode {
    /// Covered frames divided by the video length.
    #[default]
    Normalized,
    /// Covered frame count.
    Raw,
}

impl DensityMode {
    pub fn name(self) -> &'static str {
        match self {
            DensityMode::Normalized => "normalized",
            DensityMode::Raw => "raw",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathScoring {
    pub w_visual: f64,
    pub w_temporal: f64,
    pub density: DensityMode,
    /// Video length in frames.
    pub num_frames: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathScore {
    /// Minimum pairwise similarity among members (1 for a single tracklet).
    pub visual: f64,
    /// Temporal density.
    pub temporal: f64,
    pub total: f64,
}

pub fn score_path(
    members: &[usize],
    spans: &[Span],
    similarity: &SimilarityMatrix,
    scoring: &PathScoring,
) -> Result<PathScore> {
    if members.is_empty() {
        return Err(Error::contract("cannot score an empty path"));
    }
    let mut visual = 1.0f64;
    for (a, &m) in members.iter().enumerate() {
        for &n in &members[a + 1..] {
            visual = visual.min(similarity.get(m, n));
        }
    }
    let covered: usize = members.iter().map(|&m| spans[m].len()).sum();
    let temporal = match scoring.density {
        DensityMode::Normalized => covered as f64 / scoring.num_frames.max(1) as f64,
        DensityMode::Raw => covered as f64,
    };
    Ok(PathScore {
        visual,
        temporal,
        total: scoring.w_visual * visual + scoring.w_temporal * temporal,
    })
}

/// A path selected by [`cut_paths`].
#[derive(Debug, Clone, PartialEq)]
pub struct CutRecord {
    pub leaf: usize,
    /// Tracklet ids of the selected path, ascending.
    pub tracklets: Vec<usize>,
    pub score: PathScore,
}

impl CutRecord {
    pub fn to_json(&self, iteration: usize) -> serde_json::Value {
        json!({
            "iteration": iteration,
            "leaf": self.leaf,
            "tracklets": self.tracklets,
            "visual": self.score.visual,
            "temporal": self.score.temporal,
            "score": self.score.total,
        })
    }
}

/// Ordering for path selection: higher score, then earlier first frame,
/// then lower leaf id. `Ordering::Less` means `a` is preferred.
fn selection_order(
    a: (&PathHypothesis, &PathScore),
    b: (&PathHypothesis, &PathScore),
    spans: &[Span],
) -> Ordering {
    let start = |p: &PathHypothesis| p.members.iter().map(|&m| spans[m].begin).min();
    b.1.total
        .partial_cmp(&a.1.total)
        .unwrap_or(Ordering::Equal)
        .then_with(|| start(a.0).cmp(&start(b.0)))
        .then_with(|| a.0.leaf.cmp(&b.0.leaf))
}

/// Repeatedly selects the best path, records it, and removes its tracklets
/// from every other path. Paths that become empty are discarded. Only paths
/// that lost members are rescored between iterations.
pub fn cut_paths(
    paths: Vec<PathHypothesis>,
    spans: &[Span],
    similarity: &SimilarityMatrix,
    scoring: &PathScoring,
) -> Result<Vec<CutRecord>> {
    let mut live: Vec<(PathHypothesis, PathScore)> = paths
        .into_iter()
        .filter(|p| !p.members.is_empty())
        .map(|p| {
            let s = score_path(&p.members, spans, similarity, scoring)?;
            Ok((p, s))
        })
        .collect::<Result<_>>()?;
    let mut taken = vec![false; spans.len()];
    let mut cuts = Vec::with_capacity(live.len());
    while !live.is_empty() {
        let best = (0..live.len())
            .min_by(|&a, &b| {
                selection_order((&live[a].0, &live[a].1), (&live[b].0, &live[b].1), spans)
            })
            .expect("live is nonempty");
        let (path, score) = live.swap_remove(best);
        for &m in &path.members {
            taken[m] = true;
        }
        let mut survivors = Vec::with_capacity(live.len());
        for (mut p, s) in live.drain(..) {
            let before = p.members.len();
            p.members.retain(|&m| !taken[m]);
            if p.members.is_empty() {
                continue;
            }
            let s = if p.members.len() == before {
                s
            } else {
                score_path(&p.members, spans, similarity, scoring)?
            };
            survivors.push((p, s));
        }
        live = survivors;
        cuts.push(CutRecord {
            leaf: path.leaf,
            tracklets: path.members,
            score,
        });
    }
    Ok(cuts)
}

/// Full association result.
#[derive(Debug, Clone, PartialEq)]
pub struct Association {
    pub forest: PredecessorForest,
    /// Selected paths in selection order; each is one track.
    pub cuts: Vec<CutRecord>,
}

impl Association {
    /// Tracklet id groups, one per track, in selection order.
    pub fn tracks(&self) -> Vec<Vec<usize>> {
        self.cuts.iter().map(|c| c.tracklets.clone()).collect()
    }
}

/// Runs both parts of the association on spans sorted by begin frame.
pub fn associate(
    spans: &[Span],
    similarity: &SimilarityMatrix,
    scoring: &PathScoring,
) -> Result<Association> {
    let forest = build_forest(spans, similarity)?;
    let paths = enumerate_paths(&forest);
    let cuts = cut_paths(paths, spans, similarity, scoring)?;
    Ok(Association { forest, cuts })
}

/// Association over tracklets (sorted by begin frame, `id` == index).
pub fn associate_tracklets(tracklets: &[Tracklet], scoring: &PathScoring) -> Result<Association> {
    if tracklets.iter().enumerate().any(|(i, t)| t.id != i) {
        return Err(Error::contract("tracklet ids must equal their positions"));
    }
    let spans: Vec<Span> = tracklets.iter().map(Span::from).collect();
    let similarity = visual_similarity(tracklets)?;
    associate(&spans, &similarity, scoring)
}
