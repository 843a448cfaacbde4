//! Regenerates the files under `fixtures/`.
//!
//! cargo run -p tubepulse-core --example gen_fixtures -- fixtures

use std::fs::{self, File};
use std::path::PathBuf;

use tubepulse_core::ingest::write_csv;
use tubepulse_core::synth;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    fs::create_dir_all(&dir)?;

    let large = synth::generate(5000, synth::FIXTURE_SEED);
    write_csv(&large[..200], File::create(dir.join("synthetic_200.csv"))?)?;
    write_csv(&large, File::create(dir.join("synthetic_5000.csv"))?)?;
    write_csv(&synth::sample_records(), File::create(dir.join("sample_rows.csv"))?)?;
    fs::write(
        dir.join("embeddings.txt"),
        synth::embedding_fixture(synth::FIXTURE_DIM, synth::FIXTURE_SEED),
    )?;
    fs::write(dir.join("topics.txt"), synth::topics_fixture())?;
    let drafts = serde_json::to_string_pretty(&synth::drafts_fixture())?;
    fs::write(dir.join("drafts.json"), drafts + "\n")?;
    println!("fixtures written to {}", dir.display());
    Ok(())
}
