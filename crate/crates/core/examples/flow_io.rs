//! Writing and reading Middlebury `.flo` flow files.

use vostrack::flow::flo_file_name;
use vostrack::FlowField;

fn main() -> vostrack::Result<()> {
    let mut flow = FlowField::zeros(3, 4);
    flow.set(1, 2, 1.5, -0.25);
    let dir = tempfile::tempdir().map_err(|e| vostrack::Error::io("tempdir", e))?;
    let path = dir.path().join(flo_file_name(7));
    flow.write_flo(&path)?;
    let bytes = std::fs::read(&path).map_err(|e| vostrack::Error::io(&path, e))?;
    println!("{} is {} bytes (12 header + 3*4*8 data)", path.display(), bytes.len());
    let back = FlowField::read_flo(&path)?;
    assert_eq!(back, flow);
    println!("vector at row 1, col 2: {:?}", back.at(1, 2));

    let mut corrupt = bytes.clone();
    corrupt[0] ^= 0xff;
    match FlowField::from_flo_bytes(&corrupt, "corrupt.flo") {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
