//! Run-length masks: encoding, overlap measures, clipping and flow warping.

use vostrack::mask::{clip_stack, PixelGrid};
use vostrack::{FlowField, Mask};

fn main() -> vostrack::Result<()> {
    // 4x6 grid, runs are column-major: background, foreground, background, ...
    let a = Mask::rect(4, 6, 0, 0, 4, 3);
    let b = Mask::rect(4, 6, 1, 2, 2, 4);
    println!("a runs {:?}, area {}", a.runs(), a.area());
    println!("b runs {:?}, area {}", b.runs(), b.area());
    println!("IoU(a, b) = {:.4}", a.iou(&b)?);

    let grid = PixelGrid::from_fn(4, 6, |row, col| (row + col) % 3 == 0);
    let diag = Mask::encode(&grid);
    assert_eq!(diag.decode(), grid);
    println!("diagonal stripes: {:?}", diag.runs());

    // Earlier masks win contested pixels.
    let clipped = clip_stack(&[a.clone(), b.clone()])?;
    println!("b after clipping under a: area {} -> {}", b.area(), clipped[1].area());

    let shifted = a.warp(&FlowField::uniform(4, 6, 2.0, 0.0))?;
    println!("a pushed two columns right: {:?}", shifted.runs());
    Ok(())
}
