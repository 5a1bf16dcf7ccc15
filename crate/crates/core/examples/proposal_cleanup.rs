//! Score filtering, mask NMS and overlap clipping for one frame.

use vostrack::proposal::{reduce_frame, FrameProposalSet};
use vostrack::{Mask, Proposal};

fn proposal(id: i64, score: f64, mask: Mask) -> Proposal {
    Proposal {
        frame: 0,
        source_id: id,
        score,
        mask,
        embedding: None,
    }
}

fn main() -> vostrack::Result<()> {
    let (h, w) = (10, 10);
    let frame = FrameProposalSet::new(
        0,
        vec![
            proposal(0, 0.95, Mask::rect(h, w, 0, 0, 6, 6)),
            // Near-duplicate of 0: suppressed by NMS.
            proposal(1, 0.90, Mask::rect(h, w, 0, 0, 6, 5)),
            // Small overlap with 0: kept, then clipped underneath it.
            proposal(2, 0.80, Mask::rect(h, w, 4, 4, 6, 6)),
            // Below the score threshold.
            proposal(3, 0.05, Mask::rect(h, w, 8, 0, 2, 2)),
        ],
    );
    let reduced = reduce_frame(&frame, 0.1, 0.2)?;
    for p in &reduced.proposals {
        println!("kept id {} score {} area {}", p.source_id, p.score, p.mask.area());
    }
    Ok(())
}
