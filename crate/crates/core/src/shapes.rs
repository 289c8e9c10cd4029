//! Procedural doodles for each primitive.
//!
//! Every category has a parametric drawing in a nominal 100-unit box, varied
//! per instance (proportions, small rotation, hand wobble). The shipped
//! template library, held-out evaluation sketches and test fixtures all come
//! from here, keyed by seed.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::category::Category;
use crate::classifier::{Template, TemplateLibrary};
use crate::doodle::DoodleRecord;
use crate::stroke::{Point, Stroke, StrokeSequence};

/// Seed of the shipped template library.
pub const LIBRARY_SEED: u64 = 0x5eed_0001;
/// Templates per category in the shipped library.
pub const LIBRARY_PER_CATEGORY: usize = 10;

type Path = Vec<Point>;

fn seg(a: (f64, f64), b: (f64, f64)) -> Path {
    polyline(&[a, b])
}

/// Straight runs subdivided so later wobble bends them like a hand stroke.
fn polyline(corners: &[(f64, f64)]) -> Path {
    let mut out = vec![Point::new(corners[0].0, corners[0].1)];
    for w in corners.windows(2) {
        let (a, b) = (w[0], w[1]);
        let n = (((b.0 - a.0).hypot(b.1 - a.1)) / 8.0).ceil().max(1.0) as usize;
        for i in 1..=n {
            let t = i as f64 / n as f64;
            out.push(Point::new(a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)));
        }
    }
    out
}

fn closed(corners: &[(f64, f64)]) -> Path {
    let mut c = corners.to_vec();
    c.push(corners[0]);
    polyline(&c)
}

fn rect(x: f64, y: f64, w: f64, h: f64) -> Path {
    closed(&[(x, y), (x + w, y), (x + w, y + h), (x, y + h)])
}

fn arc(cx: f64, cy: f64, rx: f64, ry: f64, from: f64, sweep: f64) -> Path {
    let n = ((sweep.abs() / TAU) * 32.0).ceil().max(4.0) as usize;
    (0..=n)
        .map(|i| {
            let a = from + sweep * i as f64 / n as f64;
            Point::new(cx + rx * a.cos(), cy + ry * a.sin())
        })
        .collect()
}

fn circle(cx: f64, cy: f64, r: f64, start: f64) -> Path {
    arc(cx, cy, r, r, start, TAU)
}

fn around(rng: &mut impl Rng, base: f64, spread: f64) -> f64 {
    base + rng.gen_range(-spread..=spread)
}

fn draw(category: Category, rng: &mut impl Rng) -> Vec<Path> {
    use Category::*;
    match category {
        Camera => {
            let top = around(rng, 22.0, 4.0);
            let bump = around(rng, 12.0, 3.0);
            let r = around(rng, 18.0, 3.0);
            let start = rng.gen_range(0.0..TAU);
            vec![
                rect(0.0, top, 100.0, around(rng, 62.0, 6.0)),
                circle(50.0, top + 30.0, r, start),
                polyline(&[(30.0, top), (35.0, top - bump), (65.0, top - bump), (70.0, top)]),
            ]
        }
        Cloud => {
            let lobes = around(rng, 5.0, 0.5).round();
            let depth = around(rng, 0.2, 0.04);
            let (rx, ry) = (50.0, around(rng, 30.0, 4.0));
            let n = 96;
            let outline: Path = (0..=n)
                .map(|i| {
                    let a = TAU * i as f64 / n as f64;
                    let k = 1.0 + depth * (lobes * a / 2.0).sin().abs();
                    Point::new(50.0 + rx * k * a.cos(), 50.0 + ry * k * a.sin())
                })
                .collect();
            vec![outline]
        }
        Envelope => {
            let h = around(rng, 65.0, 8.0);
            let fold = around(rng, 0.6, 0.1) * h;
            vec![
                rect(0.0, 0.0, 100.0, h),
                polyline(&[(0.0, 0.0), (50.0, fold), (100.0, 0.0)]),
            ]
        }
        House => {
            let eave = around(rng, 45.0, 5.0);
            let overhang = around(rng, 8.0, 4.0);
            let door = around(rng, 12.0, 3.0);
            vec![
                closed(&[(15.0, eave), (85.0, eave), (85.0, 105.0), (15.0, 105.0)]),
                polyline(&[(15.0 - overhang, eave), (50.0, 0.0), (85.0 + overhang, eave)]),
                polyline(&[(50.0 - door, 105.0), (50.0 - door, 75.0), (50.0 + door, 75.0), (50.0 + door, 105.0)]),
            ]
        }
        JailWindow => {
            let bars = rng.gen_range(3..=4);
            let mut paths = vec![rect(0.0, 0.0, 100.0, around(rng, 100.0, 8.0))];
            let h = paths[0].iter().map(|p| p.y).fold(0.0, f64::max);
            for i in 1..=bars {
                let x = 100.0 * i as f64 / (bars + 1) as f64;
                paths.push(seg((x, 0.0), (x, h)));
            }
            paths
        }
        Square => {
            // Containers and cards come in many proportions.
            let aspect = rng.gen_range(0.4f64.ln()..=3.0f64.ln()).exp();
            vec![rect(0.0, 0.0, 100.0 * aspect.sqrt(), 100.0 / aspect.sqrt())]
        }
        Star => {
            let inner = around(rng, 0.42, 0.06);
            let rot = around(rng, 0.0, 0.08);
            let corners: Vec<(f64, f64)> = (0..10)
                .map(|i| {
                    let r = if i % 2 == 0 { 50.0 } else { 50.0 * inner };
                    let a = -PI / 2.0 + rot + PI * i as f64 / 5.0;
                    (50.0 + r * a.cos(), 50.0 + r * a.sin())
                })
                .collect();
            vec![closed(&corners)]
        }
        Avatar => {
            let head = around(rng, 17.0, 3.0);
            let neck = around(rng, 38.0, 4.0);
            vec![
                circle(50.0, 50.0, 50.0, rng.gen_range(0.0..TAU)),
                circle(50.0, neck, head, rng.gen_range(0.0..TAU)),
                arc(50.0, 88.0, around(rng, 30.0, 3.0), around(rng, 26.0, 3.0), PI, PI),
            ]
        }
        Back => {
            let tip = around(rng, 25.0, 6.0);
            vec![polyline(&[(70.0, 5.0), (tip, 50.0), (70.0, 95.0)])]
        }
        Forward => {
            let tip = around(rng, 75.0, 6.0);
            vec![polyline(&[(30.0, 5.0), (tip, 50.0), (30.0, 95.0)])]
        }
        LeftArrow => {
            let head = around(rng, 30.0, 6.0);
            let spread = around(rng, 28.0, 5.0);
            vec![
                seg((100.0, 50.0), (0.0, 50.0)),
                polyline(&[(head, 50.0 - spread), (0.0, 50.0), (head, 50.0 + spread)]),
            ]
        }
        Cancel => {
            let inset = around(rng, 5.0, 4.0);
            vec![
                seg((inset, inset), (100.0 - inset, 100.0 - inset)),
                seg((100.0 - inset, inset), (inset, 100.0 - inset)),
            ]
        }
        Plus => {
            let cx = around(rng, 50.0, 4.0);
            let cy = around(rng, 50.0, 4.0);
            vec![seg((cx, 0.0), (cx, 100.0)), seg((0.0, cy), (100.0, cy))]
        }
        Checkbox => {
            let w = around(rng, 100.0, 5.0);
            vec![
                rect(0.0, 0.0, w, 100.0),
                polyline(&[(around(rng, 20.0, 4.0), 50.0), (42.0, around(rng, 76.0, 5.0)), (around(rng, 82.0, 5.0), 20.0)]),
            ]
        }
        DropDown => {
            let w = around(rng, 170.0, 20.0);
            let h = around(rng, 50.0, 6.0);
            let tw = around(rng, 10.0, 2.0);
            let cx = w - 22.0;
            vec![
                rect(0.0, 0.0, w, h),
                closed(&[(cx - tw, h * 0.38), (cx + tw, h * 0.38), (cx, h * 0.66)]),
            ]
        }
        Menu => {
            let gap = around(rng, 30.0, 4.0);
            let w = around(rng, 90.0, 8.0);
            (0..3)
                .map(|i| {
                    let y = 20.0 + gap * i as f64;
                    seg((0.0, y), (w, y))
                })
                .collect()
        }
        Play => {
            let tip = around(rng, 90.0, 6.0);
            vec![closed(&[(15.0, 5.0), (tip, 50.0), (15.0, 95.0)])]
        }
        Search => {
            let r = around(rng, 30.0, 4.0);
            let c = 5.0 + r;
            let off = c + r * 0.7;
            vec![circle(c, c, r, rng.gen_range(0.0..TAU)), seg((off, off), (100.0, 100.0))]
        }
        Setting => {
            let teeth = rng.gen_range(6..=8);
            let inner_r = around(rng, 38.0, 3.0);
            let mut corners = Vec::new();
            for i in 0..teeth {
                let base = TAU * i as f64 / teeth as f64;
                let w = TAU / teeth as f64;
                for (da, r) in [(0.0, inner_r), (0.2, 50.0), (0.55, 50.0), (0.75, inner_r)] {
                    let a = base + w * da;
                    corners.push((50.0 + r * a.cos(), 50.0 + r * a.sin()));
                }
            }
            vec![closed(&corners), circle(50.0, 50.0, around(rng, 15.0, 3.0), 0.0)]
        }
        Share => {
            let r = around(rng, 9.0, 2.0);
            let hub = (15.0, 50.0);
            let top = (85.0, around(rng, 12.0, 4.0));
            let bottom = (85.0, around(rng, 88.0, 4.0));
            vec![
                circle(top.0, top.1, r, PI),
                circle(hub.0, hub.1, r, 0.0),
                circle(bottom.0, bottom.1, r, PI),
                seg(hub, top),
                seg(hub, bottom),
            ]
        }
        Slider => {
            let len = around(rng, 200.0, 20.0);
            let knob = rng.gen_range(0.2..0.8) * len;
            let r = around(rng, 12.0, 2.0);
            vec![seg((0.0, 50.0), (len, 50.0)), circle(knob, 50.0, r, PI / 2.0)]
        }
        Squiggle => {
            let len = around(rng, 200.0, 20.0);
            let amp = rng.gen_range(3.0..12.0);
            let waves = rng.gen_range(3.0..5.0);
            let phase = rng.gen_range(0.0..TAU);
            let n = 120;
            vec![(0..=n)
                .map(|i| {
                    let t = i as f64 / n as f64;
                    Point::new(len * t, 50.0 + amp * (TAU * waves * t + phase).sin())
                })
                .collect()]
        }
        Switch => {
            let w = around(rng, 100.0, 10.0);
            let r = 25.0;
            let mut pill = arc(r, r, r, r, PI / 2.0, PI);
            pill.extend(polyline(&[(r, 0.0), (w - r, 0.0)]).into_iter().skip(1));
            pill.extend(arc(w - r, r, r, r, -PI / 2.0, PI).into_iter().skip(1));
            pill.extend(polyline(&[(w - r, 2.0 * r), (r, 2.0 * r)]).into_iter().skip(1));
            let on = rng.gen_bool(0.5);
            let kx = if on { w - r } else { r };
            vec![pill, circle(kx, r, around(rng, 17.0, 2.0), 0.0)]
        }
    }
}

/// A fresh instance of `category`: proportions varied, slightly rotated and
/// stretched, with hand wobble of about 1% of the drawing size.
pub fn generate(category: Category, rng: &mut impl Rng) -> StrokeSequence {
    let paths = draw(category, rng);
    let angle = around(rng, 0.0, 0.06);
    let (sx, sy) = (around(rng, 1.0, 0.1), around(rng, 1.0, 0.1));
    let (sin, cos) = angle.sin_cos();
    let wobble = 1.0;
    StrokeSequence::new(
        paths
            .into_iter()
            .map(|path| {
                let pts = path
                    .into_iter()
                    .map(|p| {
                        let x = p.x * sx + around(rng, 0.0, wobble);
                        let y = p.y * sy + around(rng, 0.0, wobble);
                        Point::new(x * cos - y * sin, x * sin + y * cos)
                    })
                    .collect();
                Stroke::new(pts).expect("generated paths are nonempty")
            })
            .collect(),
    )
}

/// Moves every point by up to `fraction` of the sketch's larger extent in
/// each axis, then applies a random translation and uniform scale.
pub fn perturb(sketch: &StrokeSequence, fraction: f64, rng: &mut impl Rng) -> StrokeSequence {
    let extent = sketch
        .bounds()
        .map(|b| b.width().max(b.height()))
        .unwrap_or(0.0);
    let j = fraction * extent;
    let jittered = sketch.map_points(|p| {
        let (dx, dy) = if j > 0.0 {
            (rng.gen_range(-j..=j), rng.gen_range(-j..=j))
        } else {
            (0.0, 0.0)
        };
        Point::new(p.x + dx, p.y + dy)
    });
    let k = rng.gen_range(0.25..4.0);
    jittered
        .scale(k)
        .translate(rng.gen_range(-300.0..300.0), rng.gen_range(-300.0..300.0))
}

/// Splits strokes at interior points until the sketch has `target` strokes
/// (or no stroke can be split further). Longest strokes are split first.
pub fn split_strokes(sketch: &StrokeSequence, target: usize, rng: &mut impl Rng) -> StrokeSequence {
    let mut strokes: Vec<Vec<Point>> = sketch
        .strokes()
        .iter()
        .map(|s| s.points().to_vec())
        .collect();
    while strokes.len() < target {
        let Some((i, _)) = strokes
            .iter()
            .enumerate()
            .filter(|(_, s)| s.len() >= 3)
            .max_by_key(|(_, s)| s.len())
        else {
            break;
        };
        let len = strokes[i].len();
        let cut = rng.gen_range(1..len - 1);
        let tail = strokes[i][cut..].to_vec();
        strokes[i].truncate(cut + 1);
        strokes.insert(i + 1, tail);
    }
    StrokeSequence::new(
        strokes
            .into_iter()
            .map(|p| Stroke::new(p).expect("split keeps points"))
            .collect(),
    )
}

fn round2(sketch: &StrokeSequence) -> StrokeSequence {
    sketch.map_points(|p| Point::new((p.x * 100.0).round() / 100.0, (p.y * 100.0).round() / 100.0))
}

/// Labeled template doodles, `per_category` per primitive in canonical
/// category order, coordinates rounded to two decimals.
pub fn library_records(per_category: usize, seed: u64) -> Vec<DoodleRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(per_category * Category::ALL.len());
    for c in Category::ALL {
        for _ in 0..per_category {
            out.push(DoodleRecord::new(
                Some(c.name().to_string()),
                round2(&generate(c, &mut rng)),
            ));
        }
    }
    out
}

pub fn build_library(per_category: usize, seed: u64) -> TemplateLibrary {
    let templates = library_records(per_category, seed)
        .into_iter()
        .map(|r| {
            let c = r.label.as_deref().unwrap().parse().unwrap();
            Template::new(c, r.sketch).expect("generated sketches are nonempty")
        })
        .collect();
    TemplateLibrary::new(templates).expect("every category generated")
}

/// Labeled sketches not in the shipped library, perturbed by `jitter`.
pub fn held_out(per_category: usize, jitter: f64, seed: u64) -> Vec<(Category, StrokeSequence)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for c in Category::ALL {
        for _ in 0..per_category {
            let s = generate(c, &mut rng);
            out.push((c, perturb(&s, jitter, &mut rng)));
        }
    }
    out
}
