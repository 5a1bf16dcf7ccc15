//! Linking proposals in consecutive frames through flow-warped IoU.

use vostrack::assignment::Matcher;
use vostrack::proposal::FrameProposalSet;
use vostrack::tracklet::build_tracklets;
use vostrack::{FlowField, Mask, Proposal, Sequence};

fn main() -> vostrack::Result<()> {
    let (h, w) = (12, 24);
    let mut seq = Sequence::empty(h, w, 4);
    for t in 0..4 {
        // One square slides right two pixels per frame; the other is still.
        let moving = Mask::rect(h, w, 2, 2 * t as i64, 4, 4);
        let still = Mask::rect(h, w, 7, 16, 4, 4);
        let props = [moving, still]
            .into_iter()
            .enumerate()
            .map(|(id, mask)| Proposal {
                frame: t,
                source_id: id as i64,
                score: 0.9,
                mask,
                embedding: Some(vec![id as f64]),
            })
            .collect();
        seq.frames[t] = FrameProposalSet::new(t, props);
    }
    // Flow only moves the top band, where the sliding square lives.
    let mut flow = FlowField::zeros(h, w);
    for row in 0..6 {
        for col in 0..w {
            flow.set(row, col, 2.0, 0.0);
        }
    }
    let flows = vec![flow; 3];
    for t in build_tracklets(&seq, &flows, 0.05, Matcher::Hungarian)? {
        println!("{}", t.to_json());
    }
    Ok(())
}
