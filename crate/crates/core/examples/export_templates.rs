//! Regenerates `data/templates.ndjson` and its manifest from the procedural
//! shape generator.
//!
//! cargo run -p sketchsearch --example export_templates -- crates/core/data

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use sketchsearch::doodle::write_records;
use sketchsearch::shapes::{library_records, LIBRARY_PER_CATEGORY, LIBRARY_SEED};
use sketchsearch::Category;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    let records = library_records(LIBRARY_PER_CATEGORY, LIBRARY_SEED);
    write_records(BufWriter::new(File::create(dir.join("templates.ndjson"))?), &records)?;
    let mut ranges = serde_json::Map::new();
    for (i, c) in Category::ALL.iter().enumerate() {
        let start = i * LIBRARY_PER_CATEGORY;
        ranges.insert(c.name().into(), serde_json::json!([start, start + LIBRARY_PER_CATEGORY]));
    }
    let manifest = serde_json::json!({ "ranges": ranges });
    std::fs::write(dir.join("templates.manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    println!("wrote {} templates to {}", records.len(), dir.display());
    Ok(())
}
