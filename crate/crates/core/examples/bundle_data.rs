//! Regenerates the sample datasets under `data/`.
//!
//! cargo run -p flowpost --example bundle_data

use std::path::Path;

use flowpost::fixtures::{self, VtuEncoding};
use flowpost::vtk_io::write_legacy_ascii;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    std::fs::create_dir_all(&dir)?;
    let dir = dir.canonicalize()?;
    write_legacy_ascii(&fixtures::bfs(), dir.join("bfs.vtk"))?;
    write_legacy_ascii(&fixtures::unitsq4(), dir.join("unitsq4.vtk"))?;
    std::fs::write(
        dir.join("unitsq4.vtu"),
        fixtures::encode_vtu(&fixtures::unitsq4(), VtuEncoding::AppendedRaw),
    )?;
    println!("wrote datasets to {}", dir.display());
    Ok(())
}
