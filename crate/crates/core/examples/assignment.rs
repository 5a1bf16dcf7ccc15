//! Maximum-score bipartite matching with forbidden pairs.

use vostrack::assignment::{brute_force_max, greedy_max, hungarian_max};
use vostrack::ScoreMatrix;

fn main() -> vostrack::Result<()> {
    // Greedy grabs the 0.9 and is stuck with 0.1; the optimum pairs crosswise.
    let m = ScoreMatrix::from_rows(&[
        vec![Some(0.9), Some(0.8)],
        vec![Some(0.7), Some(0.1)],
        vec![None, Some(0.3)],
    ])?;
    for (name, matching) in [
        ("hungarian", hungarian_max(&m)),
        ("greedy", greedy_max(&m)),
        ("brute force", brute_force_max(&m)?),
    ] {
        println!("{name:>11}: {:?} total {:.2}", matching.pairs(), matching.total(&m));
    }
    Ok(())
}
