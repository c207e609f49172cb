//! Regenerates the driving-cycle recordings.
//!
//! `cargo run --example nedc_fixtures -- [DIR]` (default: the shipped fixture directory).

use std::path::PathBuf;

fn main() -> dopetest::Result<()> {
    let dir = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/nissan"));
    dopetest::nedc::write_fixtures(&dir)?;
    for p in dopetest::nedc::Profile::ALL {
        println!("{} ({} mg/km)", dir.join(p.file_name()).display(), p.nox());
    }
    Ok(())
}
