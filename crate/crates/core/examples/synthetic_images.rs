//! Writes the synthetic benchmark images as PGM files.
//!
//! Usage: `cargo run --example synthetic_images -- <dir> [size]`

use std::path::PathBuf;

use bitflux::dsp::{pgm_write, synthetic};

fn main() -> bitflux::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "data".into()));
    let size: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(128);
    std::fs::create_dir_all(&dir)?;
    for (name, img) in synthetic::test_images(size, size) {
        let path = dir.join(format!("{name}.pgm"));
        pgm_write(&img.to_8bit(), &path)?;
        println!("{}", path.display());
    }
    Ok(())
}
