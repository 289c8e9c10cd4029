//! Writes the checked-in test fixtures: a 10-screen sample corpus (nine
//! synthetic screens plus one hand-built screen with two sliders, a switch,
//! a card and two text lines) and a 30-sketch labeled stroke-count set
//! made of stroke prefixes of generated doodles.
//!
//! cargo run -p sketchsearch --example export_fixtures -- fixtures

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use sketchsearch::corpus::to_hierarchy_json;
use sketchsearch::doodle::{write_records, DoodleRecord};
use sketchsearch::shapes::{generate, perturb, split_strokes};
use sketchsearch::{synth, Category};

const W: f64 = 1440.0;
const H: f64 = 2560.0;

fn planted_screen() -> serde_json::Value {
    let node = |label: &str, b: [f64; 4]| json!({ "componentLabel": label, "bounds": b });
    json!({
        "app": "com.example.settings",
        "width": W,
        "height": H,
        "activity": { "root": {
            "class": "FrameLayout",
            "bounds": [0, 0, W, H],
            "children": [
                node("Text", [120.0, 260.0, 900.0, 340.0]),
                { "class": "LinearLayout", "bounds": [0, 600, W, 1300], "children": [
                    node("Slider", [160.0, 700.0, 1280.0, 780.0]),
                    node("Slider", [160.0, 960.0, 1280.0, 1040.0]),
                    node("On/Off Switch", [1100.0, 1180.0, 1320.0, 1270.0]),
                ]},
                node("Card", [100.0, 1500.0, 1340.0, 2100.0]),
                node("Text", [200.0, 2240.0, 1000.0, 2320.0]),
                { "componentLabel": "Image", "bounds": [0, 0, 200, 200], "visible-to-user": false },
                { "componentLabel": "Web View", "bounds": [0, 2400, W, H] },
            ]
        }}
    })
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    let corpus_dir = root.join("sample_corpus");
    std::fs::create_dir_all(&corpus_dir)?;
    for (i, doc) in synth::corpus(9, 0xf1c5).into_iter().enumerate() {
        let id = format!("{}", 1001 + i);
        let doc = sketchsearch::corpus::ScreenDocument { id: id.clone(), ..doc };
        std::fs::write(corpus_dir.join(format!("{id}.json")), to_hierarchy_json(&doc, W, H) + "\n")?;
    }
    std::fs::write(
        corpus_dir.join("1010.json"),
        serde_json::to_string_pretty(&planted_screen())? + "\n",
    )?;

    // Two doodles per category, each split into three strokes; every
    // stroke prefix is one sample, so each table cell averages two.
    let mut rng = ChaCha8Rng::seed_from_u64(0x7ab1e);
    let categories = [
        Category::Avatar,
        Category::Star,
        Category::Camera,
        Category::Slider,
        Category::Switch,
    ];
    let mut records = Vec::new();
    for c in categories {
        for _ in 0..2 {
            let full = perturb(&split_strokes(&generate(c, &mut rng), 3, &mut rng), 0.01, &mut rng);
            for n in 1..=full.len() {
                let prefix = full.prefix(n).map_points(|p| {
                    sketchsearch::stroke::Point::new((p.x * 100.0).round() / 100.0, (p.y * 100.0).round() / 100.0)
                });
                records.push(DoodleRecord::new(Some(c.name().to_string()), prefix));
            }
        }
    }
    assert_eq!(records.len(), 30);
    write_records(BufWriter::new(File::create(root.join("strokes30.ndjson"))?), &records)?;
    println!("wrote fixtures to {}", root.display());
    Ok(())
}
