//! Merging tracklets into tracks: predecessor forest, then path cutting.

use vostrack::fpc::{associate, enumerate_paths, DensityMode, PathScoring, SimilarityMatrix, Span};

fn main() -> vostrack::Result<()> {
    // Two identities, each broken into fragments, plus a one-frame distractor.
    let spans = [
        Span::new(0, 9),   // 0: red
        Span::new(0, 5),   // 1: blue
        Span::new(8, 14),  // 2: blue
        Span::new(12, 12), // 3: distractor
        Span::new(13, 29), // 4: red
        Span::new(17, 29), // 5: blue
    ];
    let embeddings = [
        vec![1.0, 0.0],
        vec![0.0, 1.0],
        vec![0.05, 0.95],
        vec![0.6, 0.6],
        vec![0.95, 0.02],
        vec![0.02, 1.0],
    ];
    let sim = SimilarityMatrix::from_embeddings(&embeddings)?;
    let scoring = PathScoring {
        w_visual: 0.1,
        w_temporal: 0.9,
        density: DensityMode::Normalized,
        num_frames: 30,
    };
    let result = associate(&spans, &sim, &scoring)?;
    println!("predecessors: {:?}", result.forest.predecessors);
    for p in enumerate_paths(&result.forest) {
        println!("hypothesis ending at {}: {:?}", p.leaf, p.members);
    }
    for (i, cut) in result.cuts.iter().enumerate() {
        println!("{}", cut.to_json(i));
    }
    Ok(())
}
