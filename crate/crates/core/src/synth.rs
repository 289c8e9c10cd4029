//! Synthetic Rico-like screens and jittered queries derived from them.
//!
//! Screens are stacks of non-overlapping rows, each holding one to three
//! elements with Rico component labels, so the only nesting a derived query
//! can contain is the square + squiggle pair emitted for a text button.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::category::{Category, QueryCategory};
use crate::corpus::{CategoryMapping, ScreenDocument, ScreenElement};
use crate::geometry::BBox;
use crate::query::{SessionSnapshot, SnapshotElement, CANVAS_HEIGHT, CANVAS_WIDTH};

/// Labels drawn for synthetic elements with relative frequencies and a
/// nominal size (fraction of screen width, fraction of screen height).
const LABELS: &[(&str, u32, (f64, f64))] = &[
    ("Text", 30, (0.5, 0.03)),
    ("Image", 12, (0.4, 0.15)),
    ("Text Button", 10, (0.3, 0.05)),
    ("List Item", 6, (0.9, 0.08)),
    ("Card", 3, (0.8, 0.2)),
    ("Checkbox", 3, (0.06, 0.035)),
    ("On/Off Switch", 3, (0.12, 0.035)),
    ("Slider", 2, (0.6, 0.03)),
    ("Drop Down Menu", 2, (0.4, 0.05)),
    ("Rating Bar", 1, (0.35, 0.04)),
    ("Input", 4, (0.7, 0.05)),
    ("Web View", 1, (0.9, 0.3)),
    ("icon:arrow_backward", 3, (0.08, 0.045)),
    ("icon:menu", 3, (0.08, 0.045)),
    ("icon:search", 3, (0.08, 0.045)),
    ("icon:close", 2, (0.08, 0.045)),
    ("icon:add", 2, (0.08, 0.045)),
    ("icon:share", 2, (0.08, 0.045)),
    ("icon:settings", 1, (0.08, 0.045)),
    ("icon:star", 1, (0.08, 0.045)),
    ("icon:home", 1, (0.08, 0.045)),
    ("icon:email", 1, (0.08, 0.045)),
    ("icon:play", 1, (0.08, 0.045)),
    ("icon:person", 1, (0.08, 0.045)),
    ("icon:camera", 1, (0.08, 0.045)),
    ("icon:arrow_forward", 1, (0.08, 0.045)),
    ("icon:more", 2, (0.08, 0.045)),
];

const APPS: &[&str] = &[
    "com.example.news",
    "com.example.music",
    "com.example.shop",
    "com.example.mail",
    "com.example.fitness",
    "com.example.maps",
];

fn pick_label(rng: &mut impl Rng) -> (&'static str, (f64, f64)) {
    let total: u32 = LABELS.iter().map(|l| l.1).sum();
    let mut roll = rng.gen_range(0..total);
    for &(label, weight, size) in LABELS {
        if roll < weight {
            return (label, size);
        }
        roll -= weight;
    }
    unreachable!()
}

fn screen(id: String, rng: &mut impl Rng) -> ScreenDocument {
    let mut elements = Vec::new();
    let mut y = rng.gen_range(0.0..0.04);
    let target = rng.gen_range(6..=20);
    while elements.len() < target {
        let per_row = *[1, 1, 1, 2, 2, 3].choose(rng).unwrap();
        let picks: Vec<_> = (0..per_row).map(|_| pick_label(rng)).collect();
        let row_h = picks
            .iter()
            .map(|(_, (_, h))| h * rng.gen_range(0.8..1.25))
            .fold(0.0, f64::max);
        if y + row_h > 0.98 {
            break;
        }
        let slot = 1.0 / per_row as f64;
        for (k, (label, (w, h))) in picks.into_iter().enumerate() {
            let w = (w * rng.gen_range(0.75..1.3)).min(slot * 0.92);
            let h = (h * rng.gen_range(0.8..1.2)).min(row_h);
            let left = slot * k as f64 + rng.gen_range(0.0..(slot - w).max(1e-6));
            elements.push(ScreenElement {
                label: label.to_string(),
                bbox: BBox::new(left + w / 2.0, y + row_h / 2.0, w, h),
                visible: rng.gen_bool(0.97),
            });
        }
        y += row_h + rng.gen_range(0.005..0.04);
    }
    ScreenDocument {
        id,
        source_app: Some(APPS.choose(rng).unwrap().to_string()),
        elements,
    }
}

/// Another screen of the same app: a few elements dropped or relabeled,
/// the rest of the layout kept.
fn sibling(base: &ScreenDocument, id: String, rng: &mut impl Rng) -> ScreenDocument {
    let mut elements = base.elements.clone();
    for _ in 0..rng.gen_range(1..=3) {
        if elements.len() > 4 {
            let k = rng.gen_range(0..elements.len());
            elements.remove(k);
        }
    }
    for _ in 0..rng.gen_range(0..=2) {
        let k = rng.gen_range(0..elements.len());
        elements[k].label = pick_label(rng).0.to_string();
    }
    ScreenDocument {
        id,
        source_app: base.source_app.clone(),
        elements,
    }
}

/// Share of screens generated as siblings of an earlier screen.
const SIBLING_RATE: f64 = 0.4;

/// `count` screens with ids `synth-00000`, `synth-00001`, ... Some screens
/// are near-duplicates of earlier ones, as screens within one app are.
pub fn corpus(count: usize, seed: u64) -> Vec<ScreenDocument> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<ScreenDocument> = Vec::with_capacity(count);
    for i in 0..count {
        let id = format!("synth-{i:05}");
        let doc = if !out.is_empty() && rng.gen_bool(SIBLING_RATE) {
            let base = rng.gen_range(0..out.len());
            sibling(&out[base], id, &mut rng)
        } else {
            screen(id, &mut rng)
        };
        out.push(doc);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryJitter {
    /// Maximum center offset as a fraction of each screen dimension.
    pub center: f64,
    /// Maximum relative change of width and height.
    pub size: f64,
    pub min_elements: usize,
    pub max_elements: usize,
}

impl Default for QueryJitter {
    fn default() -> Self {
        Self {
            center: 0.05,
            size: 0.10,
            min_elements: 4,
            max_elements: 8,
        }
    }
}

/// Primitive a user would draw for a mapped screen element: the specific
/// icon over the generic `cloud` when both apply.
fn drawable(set: crate::corpus::CategorySet) -> Option<QueryCategory> {
    let mut prims: Vec<QueryCategory> = set.iter().collect();
    if prims.len() > 1 {
        prims.retain(|c| *c != QueryCategory::Primitive(Category::Cloud));
    }
    prims.first().copied()
}

fn jitter_box(b: BBox, j: &QueryJitter, rng: &mut impl Rng) -> BBox {
    let mut off = |amount: f64| if amount > 0.0 { rng.gen_range(-amount..=amount) } else { 0.0 };
    let cx = (b.cx + off(j.center)).clamp(0.0, 1.0);
    let cy = (b.cy + off(j.center)).clamp(0.0, 1.0);
    let w = b.w * (1.0 + off(j.size));
    let h = b.h * (1.0 + off(j.size));
    BBox::new(cx, cy, w, h)
}

fn to_canvas(b: BBox, category: Category) -> SnapshotElement {
    SnapshotElement {
        category,
        bbox: [b.cx * CANVAS_WIDTH, b.cy * CANVAS_HEIGHT, b.w * CANVAS_WIDTH, b.h * CANVAS_HEIGHT],
    }
}

/// A session snapshot targeting `doc`: a random subset of its visible,
/// mapped elements with jittered boxes, in random drawing order. Text
/// buttons are drawn as a squiggle inside a square. Returns `None` when the
/// screen has fewer than `min_elements` drawable elements.
pub fn derive_query(
    doc: &ScreenDocument,
    mapping: &CategoryMapping,
    jitter: &QueryJitter,
    rng: &mut impl Rng,
) -> Option<SessionSnapshot> {
    let mut drawable_elements: Vec<(QueryCategory, BBox)> = doc
        .elements
        .iter()
        .filter(|e| e.visible)
        .filter_map(|e| drawable(mapping.map_label(&e.label)).map(|c| (c, e.bbox)))
        .collect();
    if drawable_elements.len() < jitter.min_elements {
        return None;
    }
    let upper = jitter.max_elements.min(drawable_elements.len());
    let n = rng.gen_range(jitter.min_elements..=upper);
    drawable_elements.shuffle(rng);
    drawable_elements.truncate(n);
    // A jittered squiggle can land inside a neighbouring square and fuse
    // into a text button the screen does not have; redraw when it does.
    let mut snapshot = None;
    for _ in 0..MAX_REDRAWS {
        let mut elements = Vec::new();
        for &(c, b) in &drawable_elements {
            let b = jitter_box(b, jitter, rng);
            match c {
                QueryCategory::Primitive(p) => elements.push(to_canvas(b, p)),
                QueryCategory::TextButton => {
                    elements.push(to_canvas(b, Category::Square));
                    let label = BBox::new(b.cx, b.cy, b.w * 0.6, b.h * 0.5);
                    elements.push(to_canvas(label, Category::Squiggle));
                }
            }
        }
        let s = SessionSnapshot {
            target: Some(doc.id.clone()),
            canvas: [CANVAS_WIDTH, CANVAS_HEIGHT],
            elements,
        };
        let faithful = s.query().is_ok_and(|q| q.len() == n);
        snapshot = Some(s);
        if faithful {
            break;
        }
    }
    snapshot
}

const MAX_REDRAWS: usize = 32;

/// `count` snapshots for targets drawn uniformly from `docs`.
pub fn queries(
    docs: &[ScreenDocument],
    mapping: &CategoryMapping,
    jitter: &QueryJitter,
    count: usize,
    seed: u64,
) -> Vec<SessionSnapshot> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eligible: Vec<&ScreenDocument> = docs
        .iter()
        .filter(|d| {
            d.elements
                .iter()
                .filter(|e| e.visible && drawable(mapping.map_label(&e.label)).is_some())
                .count()
                >= jitter.min_elements
        })
        .collect();
    if eligible.is_empty() {
        return Vec::new();
    }
    (0..count)
        .map(|_| {
            let doc = eligible[rng.gen_range(0..eligible.len())];
            derive_query(doc, mapping, jitter, &mut rng).expect("eligible screen")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::CorpusIndex;

    #[test]
    fn deterministic() {
        assert_eq!(corpus(20, 7), corpus(20, 7));
        assert_ne!(corpus(20, 7), corpus(20, 8));
    }

    #[test]
    fn elements_stay_in_frame_without_overlap() {
        for doc in corpus(200, 3) {
            for (i, a) in doc.elements.iter().enumerate() {
                let b = a.bbox;
                assert!(b.left() >= -1e-9 && b.right() <= 1.0 + 1e-9, "{doc:?}");
                assert!(b.top() >= -1e-9 && b.bottom() <= 1.0 + 1e-9);
                for other in &doc.elements[i + 1..] {
                    assert!(b.intersection_area(&other.bbox) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn queries_respect_jitter_bounds() {
        let mapping = CategoryMapping::default();
        let docs = corpus(50, 11);
        let j = QueryJitter::default();
        for q in queries(&docs, &mapping, &j, 100, 5) {
            let target = q.target.clone().unwrap();
            let doc = docs.iter().find(|d| d.id == target).unwrap();
            let drawn = q.query().unwrap();
            assert!(drawn.len() >= j.min_elements && drawn.len() <= j.max_elements);
            // Each drawn element is within jitter of a same-category element.
            for e in &drawn.elements {
                let ok = doc.elements.iter().any(|s| {
                    mapping.map_label(&s.label).contains(e.query_category())
                        && (s.bbox.cx - e.bbox.cx).abs() <= j.center + 1e-9
                        && (s.bbox.cy - e.bbox.cy).abs() <= j.center + 1e-9
                        && (e.bbox.w / s.bbox.w - 1.0).abs() <= j.size + 1e-9
                });
                assert!(ok, "{e:?}");
            }
        }
    }

    #[test]
    fn corpus_indexes() {
        let idx = CorpusIndex::build(corpus(100, 1), &CategoryMapping::default()).unwrap();
        assert_eq!(idx.len(), 100);
        assert!(idx.info().unmapped_elements > 0);
    }
}
