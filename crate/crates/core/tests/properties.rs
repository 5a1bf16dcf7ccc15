mod common;

use common::{check_invariants, random_ref_tracklets, random_spec, reference_fpc, Rng};
use proptest::prelude::*;
use vostrack::assignment::{brute_force_max, greedy_max, hungarian_max, ScoreMatrix};
use vostrack::eval::mean_j;
use vostrack::fpc::{associate, DensityMode, PathScoring, SimilarityMatrix, Span};
use vostrack::mask::{clip_stack, PixelGrid};
use vostrack::proposal::{FrameProposalSet, Proposal};
use vostrack::saliency::saliency;
use vostrack::synth::generate;
use vostrack::{track, Config, FlowField, Mask, Sequence, Tracklet};

fn grid_strategy() -> impl Strategy<Value = PixelGrid> {
    (1u32..7, 1u32..7).prop_flat_map(|(h, w)| {
        proptest::collection::vec(any::<bool>(), (h * w) as usize).prop_map(move |bits| {
            PixelGrid::from_fn(h, w, |row, col| bits[(col * h + row) as usize])
        })
    })
}

fn grid_pair() -> impl Strategy<Value = (PixelGrid, PixelGrid)> {
    (1u32..7, 1u32..7).prop_flat_map(|(h, w)| {
        let n = (h * w) as usize;
        (
            proptest::collection::vec(any::<bool>(), n),
            proptest::collection::vec(any::<bool>(), n),
        )
            .prop_map(move |(a, b)| {
                (
                    PixelGrid::from_fn(h, w, |r, c| a[(c * h + r) as usize]),
                    PixelGrid::from_fn(h, w, |r, c| b[(c * h + r) as usize]),
                )
            })
    })
}

fn matrix_strategy(max: usize) -> impl Strategy<Value = ScoreMatrix> {
    (1..=max, 1..=max, any::<bool>()).prop_flat_map(|(r, c, integral)| {
        proptest::collection::vec((any::<bool>(), 0u8..5, -1.0f64..2.0), r * c).prop_map(
            move |cells| {
                let mut m = ScoreMatrix::new(r, c);
                for (i, (present, small, real)) in cells.into_iter().enumerate() {
                    if present {
                        let s = if integral { small as f64 } else { real };
                        m.set(i / c, i % c, s).unwrap();
                    }
                }
                m
            },
        )
    })
}

proptest! {
    #[test]
    fn rle_round_trip(grid in grid_strategy()) {
        let m = Mask::encode(&grid);
        prop_assert_eq!(m.decode(), grid.clone());
        prop_assert_eq!(m.area(), grid.count());
        let again = Mask::from_runs(m.height(), m.width(), m.runs()).unwrap();
        prop_assert_eq!(again, m);
    }

    #[test]
    fn set_ops_match_pixel_grids((ga, gb) in grid_pair()) {
        let (a, b) = (Mask::encode(&ga), Mask::encode(&gb));
        let (h, w) = (ga.height(), ga.width());
        let both = PixelGrid::from_fn(h, w, |r, c| ga.get(r, c) && gb.get(r, c));
        let either = PixelGrid::from_fn(h, w, |r, c| ga.get(r, c) || gb.get(r, c));
        let minus = PixelGrid::from_fn(h, w, |r, c| ga.get(r, c) && !gb.get(r, c));
        prop_assert_eq!(a.intersection_area(&b).unwrap(), both.count());
        prop_assert_eq!(a.union(&b).unwrap().decode(), either.clone());
        prop_assert_eq!(a.difference(&b).unwrap().decode(), minus);
        let iou = a.iou(&b).unwrap();
        prop_assert_eq!(iou, b.iou(&a).unwrap());
        prop_assert!((0.0..=1.0).contains(&iou));
        if either.count() > 0 {
            prop_assert_eq!(iou, both.count() as f64 / either.count() as f64);
        }
    }

    #[test]
    fn clip_stack_disjoint_subsets(grids in proptest::collection::vec(grid_strategy(), 1..5)) {
        let (h, w) = (grids[0].height(), grids[0].width());
        let masks: Vec<Mask> = grids
            .iter()
            .map(|g| Mask::encode(&PixelGrid::from_fn(h, w, |r, c| {
                r < g.height() && c < g.width() && g.get(r, c)
            })))
            .collect();
        let clipped = clip_stack(&masks).unwrap();
        let union_in = masks.iter().fold(Mask::empty(h, w), |acc, m| acc.union(m).unwrap());
        let union_out = clipped.iter().fold(Mask::empty(h, w), |acc, m| acc.union(m).unwrap());
        prop_assert_eq!(union_in, union_out);
        for (i, m) in clipped.iter().enumerate() {
            prop_assert!(m.is_subset_of(&masks[i]).unwrap());
            for other in &clipped[i + 1..] {
                prop_assert_eq!(m.intersection_area(other).unwrap(), 0);
            }
        }
        prop_assert_eq!(&clipped[0], &masks[0]);
    }

    #[test]
    fn warp_properties(grid in grid_strategy(), dx in -3i32..4, dy in -3i32..4) {
        let m = Mask::encode(&grid);
        let (h, w) = m.dims();
        prop_assert_eq!(m.warp(&FlowField::zeros(h, w)).unwrap(), m.clone());
        let moved = m.warp(&FlowField::uniform(h, w, dx as f32, dy as f32)).unwrap();
        prop_assert!(moved.area() <= m.area());
        let expected = PixelGrid::from_fn(h, w, |r, c| {
            let (sr, sc) = (r as i32 - dy, c as i32 - dx);
            sr >= 0 && sc >= 0 && (sr as u32) < h && (sc as u32) < w && grid.get(sr as u32, sc as u32)
        });
        prop_assert_eq!(moved.decode(), expected);
    }

    #[test]
    fn flo_round_trip(h in 1u32..5, w in 1u32..5, seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let vectors = (0..h * w)
            .map(|_| [(rng.unit() * 40.0 - 20.0) as f32, (rng.unit() * 40.0 - 20.0) as f32])
            .collect();
        let f = FlowField::from_vectors(h, w, vectors).unwrap();
        prop_assert_eq!(FlowField::from_flo_bytes(&f.to_flo_bytes(), "mem").unwrap(), f);
    }

    #[test]
    fn hungarian_equals_brute_force(m in matrix_strategy(6)) {
        let fast = hungarian_max(&m);
        let slow = brute_force_max(&m).unwrap();
        prop_assert!(fast.is_valid_for(&m));
        prop_assert_eq!(fast.total(&m), slow.total(&m));
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn greedy_never_beats_hungarian(m in matrix_strategy(7)) {
        let g = greedy_max(&m);
        prop_assert!(g.is_valid_for(&m));
        prop_assert!(g.total(&m) <= hungarian_max(&m).total(&m) + m.tolerance());
    }

    #[test]
    fn hungarian_total_invariant_to_row_order(m in matrix_strategy(6), seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let mut perm: Vec<usize> = (0..m.rows()).collect();
        for i in (1..perm.len()).rev() {
            perm.swap(i, rng.below(0, i + 1));
        }
        let rows: Vec<Vec<Option<f64>>> = perm
            .iter()
            .map(|&r| (0..m.cols()).map(|c| m.get(r, c)).collect())
            .collect();
        let shuffled = ScoreMatrix::from_rows(&rows).unwrap();
        let a = hungarian_max(&m).total(&m);
        let b = hungarian_max(&shuffled).total(&shuffled);
        prop_assert!((a - b).abs() <= m.tolerance());
    }

    #[test]
    fn fpc_matches_reference_and_partitions(seed in any::<u64>(), raw in any::<bool>()) {
        let mut rng = Rng::new(seed);
        let ls = random_ref_tracklets(&mut rng, 12, 25);
        let density = if raw { DensityMode::Raw } else { DensityMode::Normalized };
        let spans: Vec<Span> = ls.iter().map(|t| Span::new(t.b, t.e)).collect();
        let emb: Vec<Vec<f64>> = ls.iter().map(|t| t.r.clone()).collect();
        let scoring = PathScoring { w_visual: 0.1, w_temporal: 0.9, density, num_frames: 25 };
        let tracks = associate(&spans, &SimilarityMatrix::from_embeddings(&emb).unwrap(), &scoring)
            .unwrap()
            .tracks();
        prop_assert_eq!(&tracks, &reference_fpc(&ls, 0.1, 0.9, 25, density));
        let mut seen: Vec<usize> = tracks.iter().flatten().copied().collect();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..ls.len()).collect::<Vec<_>>());
        for t in &tracks {
            for (i, &a) in t.iter().enumerate() {
                for &b in &t[i + 1..] {
                    prop_assert!(!spans[a].overlaps(&spans[b]));
                }
            }
        }
        // Power-of-two scaling is exact in floating point, so V is unchanged bit for bit.
        let scaled: Vec<Vec<f64>> = emb.iter().map(|e| e.iter().map(|v| v * 8.0).collect()).collect();
        let again = associate(&spans, &SimilarityMatrix::from_embeddings(&scaled).unwrap(), &scoring)
            .unwrap()
            .tracks();
        prop_assert_eq!(again, tracks);
    }

    #[test]
    fn saliency_additive_and_scales(
        lens in proptest::collection::vec(1usize..6, 1..5),
        scores in proptest::collection::vec(0.05f64..0.5, 30),
    ) {
        let mut frame = 0;
        let mut k = 0;
        let tracklets: Vec<Tracklet> = lens
            .iter()
            .enumerate()
            .map(|(id, &len)| {
                let props = (0..len)
                    .map(|i| {
                        k += 1;
                        Proposal {
                            frame: frame + i,
                            source_id: 0,
                            score: scores[k % scores.len()],
                            mask: Mask::full(1, 1),
                            embedding: None,
                        }
                    })
                    .collect();
                frame += len + 1;
                Tracklet::new(id, props).unwrap()
            })
            .collect();
        let all: Vec<&Tracklet> = tracklets.iter().collect();
        let total = saliency(&all).unwrap();
        let parts: f64 = tracklets.iter().map(|t| saliency(&[t]).unwrap()).sum();
        prop_assert!((total - parts).abs() <= 1e-12 * total.max(1.0));
        let doubled: Vec<Tracklet> = tracklets
            .iter()
            .map(|t| {
                let props = t.proposals.iter().map(|p| Proposal { score: p.score * 2.0, ..p.clone() }).collect();
                Tracklet::new(t.id, props).unwrap()
            })
            .collect();
        let d: Vec<&Tracklet> = doubled.iter().collect();
        prop_assert_eq!(saliency(&d).unwrap(), 2.0 * total);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reduction_is_idempotent(seed in any::<u64>()) {
        let sc = generate(&random_spec(seed)).unwrap();
        let once = sc.proposals.reduce(0.1, 0.2).unwrap();
        prop_assert_eq!(once.reduce(0.1, 0.2).unwrap(), once);
    }

    #[test]
    fn pipeline_invariants(seed in any::<u64>()) {
        let sc = generate(&random_spec(seed)).unwrap();
        let config = Config { max_tracks: 0, ..Config::default() };
        let run = track(&sc.proposals, &sc.spec, &config).unwrap();
        if let Err(e) = check_invariants(&sc.proposals, &run, &config) {
            return Err(TestCaseError::fail(e));
        }
    }

    #[test]
    fn eval_ignores_prediction_order(seed in any::<u64>()) {
        let sc = generate(&random_spec(seed)).unwrap();
        let run = track(&sc.proposals, &sc.spec, &Config::default()).unwrap();
        let mut reversed = run.output.clone();
        reversed.tracks.reverse();
        let a = mean_j(&run.output, &sc.ground_truth).unwrap();
        let b = mean_j(&reversed, &sc.ground_truth).unwrap();
        prop_assert!((a.mean_j - b.mean_j).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&a.mean_j));
    }
}

#[test]
fn empty_frames_between_proposals() {
    let mut seq = Sequence::empty(4, 4, 3);
    for t in [0, 2] {
        seq.frames[t] = FrameProposalSet::new(
            t,
            vec![Proposal {
                frame: t,
                source_id: 0,
                score: 0.9,
                mask: Mask::full(4, 4),
                embedding: Some(vec![1.0]),
            }],
        );
    }
    // No flow is needed when a frame pair has an empty side.
    let run = track(&seq, &Vec::<FlowField>::new(), &Config::default()).unwrap();
    assert_eq!(run.tracklets.len(), 2);
    assert_eq!(run.output.tracks.len(), 1);
    assert_eq!(run.output.tracks[0].segments.len(), 2);
}
