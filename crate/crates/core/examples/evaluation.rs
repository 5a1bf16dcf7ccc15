//! Scoring predictions against ground truth: mean region Jaccard and purity.

use vostrack::eval::mean_j;
use vostrack::synth::{generate, purity, ObjectSpec, ScenarioSpec};

fn main() -> vostrack::Result<()> {
    let mut spec = ScenarioSpec {
        seed: 1,
        frames: 6,
        height: 20,
        width: 40,
        embedding_dim: None,
        objects: vec![ObjectSpec::fixed([6, 6], 2.0, 2.0), ObjectSpec::fixed([6, 6], 25.0, 10.0)],
        noise: Default::default(),
    };
    spec.objects[1].visible_ranges = Some(vec![[0, 2]]);
    let gt = generate(&spec)?.ground_truth;

    // A prediction that swaps the ids, drops half of object 1 and adds a spurious track.
    let mut pred = gt.clone();
    pred.tracks[0].track_id = 2;
    pred.tracks[1].track_id = 1;
    let half: Vec<usize> = pred.tracks[0].segments.keys().copied().skip(3).collect();
    for f in half {
        pred.tracks[0].segments.remove(&f);
    }
    let mut extra = pred.tracks[0].clone();
    extra.track_id = 9;
    extra.segments.clear();
    extra.segments.insert(5, vostrack::Mask::rect(20, 40, 15, 30, 2, 2));
    pred.tracks.push(extra);

    let report = mean_j(&pred, &gt)?;
    print!("{}", report.table());
    let p = purity(&pred, &gt)?;
    println!("purity per object {:?}, mean {:.3}", p.per_object, p.mean);
    Ok(())
}
