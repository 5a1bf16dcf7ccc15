//! Ranking tracks by saliency and keeping the top ones.

use vostrack::proposal::Proposal;
use vostrack::saliency::{select_top, ScoredTrack};
use vostrack::{Mask, Tracklet};

fn tracklet(id: usize, begin: usize, scores: &[f64]) -> vostrack::Result<Tracklet> {
    let proposals = scores
        .iter()
        .enumerate()
        .map(|(k, &score)| Proposal {
            frame: begin + k,
            source_id: id as i64,
            score,
            mask: Mask::full(1, 1),
            embedding: None,
        })
        .collect();
    Tracklet::new(id, proposals)
}

fn main() -> vostrack::Result<()> {
    let tracklets = vec![
        tracklet(0, 0, &[0.9; 10])?,
        tracklet(1, 0, &[0.3; 4])?,
        tracklet(2, 5, &[0.8; 3])?,
        tracklet(3, 12, &[0.5; 8])?,
    ];
    let groups = [vec![0, 3], vec![1], vec![2]];
    let scored = groups
        .iter()
        .map(|g| ScoredTrack::new(g, &tracklets))
        .collect::<vostrack::Result<Vec<_>>>()?;
    for r in select_top(scored, 2) {
        println!("track {} <- tracklets {:?}, saliency {:.2}", r.track_id, r.track.tracklet_ids, r.track.saliency);
    }
    Ok(())
}
