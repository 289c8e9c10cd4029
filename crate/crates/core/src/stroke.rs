//! Stroke data model and the preprocessing pipeline shared by both recognizers.
//!
//! A doodle is a [`StrokeSequence`]: strokes in temporal order, each an ordered
//! polyline of [`Point`]s. Before classification a doodle is normalized into the
//! unit box, resampled at a fixed spacing, and optionally delta-encoded into an
//! [`EncodedSketch`] for the neural runtime.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default resampling spacing in normalized units.
pub const DEFAULT_SPACING: f64 = 0.02;

/// Two points closer than this are considered coincident when closing a
/// resampled stroke.
const COINCIDENT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn distance_sq(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct Stroke {
    points: Vec<Point>,
}

impl Stroke {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("stroke has no points"));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::invalid(format!(
                "stroke point ({}, {}) is not finite",
                p.x, p.y
            )));
        }
        Ok(Self { points })
    }

    pub fn from_xy(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::invalid(format!(
                "stroke has {} x values but {} y values",
                xs.len(),
                ys.len()
            )));
        }
        Self::new(
            xs.iter()
                .zip(ys)
                .map(|(&x, &y)| Point::new(x, y))
                .collect(),
        )
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Polyline length.
    pub fn arc_length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].distance(&w[1])).sum()
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }
}

impl TryFrom<Vec<Point>> for Stroke {
    type Error = Error;

    fn try_from(points: Vec<Point>) -> Result<Self> {
        Stroke::new(points)
    }
}

impl From<Stroke> for Vec<Point> {
    fn from(stroke: Stroke) -> Self {
        stroke.points
    }
}

/// Axis-aligned bounding box given by its min and max corners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min: Point,
    pub max: Point,
}

impl Bounds {
    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }
}

/// An ordered list of strokes. May be empty while a user is still drawing;
/// operations that need content reject the empty sequence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StrokeSequence {
    strokes: Vec<Stroke>,
}

impl StrokeSequence {
    pub fn new(strokes: Vec<Stroke>) -> Self {
        Self { strokes }
    }

    pub fn strokes(&self) -> &[Stroke] {
        &self.strokes
    }

    pub fn len(&self) -> usize {
        self.strokes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strokes.is_empty()
    }

    pub fn push(&mut self, stroke: Stroke) {
        self.strokes.push(stroke);
    }

    pub fn pop(&mut self) -> Option<Stroke> {
        self.strokes.pop()
    }

    pub fn clear(&mut self) {
        self.strokes.clear();
    }

    pub fn points(&self) -> impl Iterator<Item = &Point> {
        self.strokes.iter().flat_map(|s| s.points.iter())
    }

    pub fn point_count(&self) -> usize {
        self.strokes.iter().map(Stroke::len).sum()
    }

    /// Tight bounding box over every point, `None` when empty.
    pub fn bounds(&self) -> Option<Bounds> {
        let mut points = self.points();
        let first = *points.next()?;
        let (min, max) = points.fold((first, first), |(lo, hi), p| {
            (
                Point::new(lo.x.min(p.x), lo.y.min(p.y)),
                Point::new(hi.x.max(p.x), hi.y.max(p.y)),
            )
        });
        Some(Bounds { min, max })
    }

    /// Applies `f` to every point, keeping the stroke structure.
    pub fn map_points(&self, mut f: impl FnMut(Point) -> Point) -> Self {
        Self {
            strokes: self
                .strokes
                .iter()
                .map(|s| Stroke {
                    points: s.points.iter().map(|&p| f(p)).collect(),
                })
                .collect(),
        }
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        self.map_points(|p| Point::new(p.x + dx, p.y + dy))
    }

    pub fn scale(&self, k: f64) -> Self {
        self.map_points(|p| Point::new(p.x * k, p.y * k))
    }

    /// The first `n` strokes.
    pub fn prefix(&self, n: usize) -> Self {
        Self {
            strokes: self.strokes[..n.min(self.strokes.len())].to_vec(),
        }
    }
}

impl From<Vec<Stroke>> for StrokeSequence {
    fn from(strokes: Vec<Stroke>) -> Self {
        Self::new(strokes)
    }
}

/// Translates the sketch so its bounding box starts at the origin and scales it
/// uniformly so the larger side has length 1. A sketch without extent is only
/// translated.
pub fn normalize(sketch: &StrokeSequence) -> Result<StrokeSequence> {
    let bounds = sketch
        .bounds()
        .ok_or_else(|| Error::invalid("cannot normalize an empty sketch"))?;
    let extent = bounds.width().max(bounds.height());
    let scale = if extent > 0.0 { 1.0 / extent } else { 1.0 };
    let origin = bounds.min;
    Ok(sketch.map_points(|p| Point::new((p.x - origin.x) * scale, (p.y - origin.y) * scale)))
}

/// Resamples every stroke so consecutive points are `spacing` apart, keeping
/// the first and last original points.
///
/// Each new point is the first point further along the polyline whose
/// straight-line distance to the previously emitted point equals `spacing`.
/// On straight runs this coincides with arc-length sampling; around corners
/// it keeps the gap between emitted points exact.
pub fn resample(sketch: &StrokeSequence, spacing: f64) -> Result<StrokeSequence> {
    if !spacing.is_finite() || spacing <= 0.0 {
        return Err(Error::invalid(format!(
            "resample spacing must be positive, got {spacing}"
        )));
    }
    if sketch.is_empty() {
        return Err(Error::invalid("cannot resample an empty sketch"));
    }
    Ok(StrokeSequence {
        strokes: sketch
            .strokes
            .iter()
            .map(|s| Stroke {
                points: resample_stroke(&s.points, spacing),
            })
            .collect(),
    })
}

fn resample_stroke(points: &[Point], spacing: f64) -> Vec<Point> {
    let first = points[0];
    let last = points[points.len() - 1];
    let mut out = vec![first];
    let mut anchor = first;
    let spacing_sq = spacing * spacing;

    let mut i = 0;
    // Start of the not-yet-consumed part of segment i.
    let mut seg_start = first;
    while i + 1 < points.len() {
        let seg_end = points[i + 1];
        if anchor.distance_sq(&seg_end) < spacing_sq {
            i += 1;
            seg_start = seg_end;
            continue;
        }
        // seg_start lies strictly inside the circle around the anchor and
        // seg_end lies on or outside it: exactly one crossing in (0, 1].
        let d = Point::new(seg_end.x - seg_start.x, seg_end.y - seg_start.y);
        let r = Point::new(seg_start.x - anchor.x, seg_start.y - anchor.y);
        let a = d.x * d.x + d.y * d.y;
        let b = 2.0 * (r.x * d.x + r.y * d.y);
        let c = r.x * r.x + r.y * r.y - spacing_sq;
        let disc = (b * b - 4.0 * a * c).max(0.0);
        let t = ((-b + disc.sqrt()) / (2.0 * a)).clamp(0.0, 1.0);
        let next = Point::new(seg_start.x + t * d.x, seg_start.y + t * d.y);
        out.push(next);
        anchor = next;
        seg_start = next;
    }

    let tail = out[out.len() - 1];
    if out.len() > 1 && tail.distance(&last) <= COINCIDENT_EPS {
        *out.last_mut().unwrap() = last;
    } else {
        out.push(last);
    }
    out
}

/// One delta step: offset from the previous point and whether the pen lifts
/// after this point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub dx: f64,
    pub dy: f64,
    pub pen_lift: bool,
}

impl Step {
    pub fn features(&self) -> [f64; 3] {
        [self.dx, self.dy, if self.pen_lift { 1.0 } else { 0.0 }]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EncodedSketch {
    pub steps: Vec<Step>,
}

impl EncodedSketch {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Encodes points as successive differences, starting from the origin, with
/// `pen_lift` set on the last point of every stroke.
pub fn delta_encode(sketch: &StrokeSequence) -> Result<EncodedSketch> {
    if sketch.is_empty() {
        return Err(Error::invalid("cannot encode an empty sketch"));
    }
    let mut steps = Vec::with_capacity(sketch.point_count());
    let mut cursor = Point::new(0.0, 0.0);
    for stroke in &sketch.strokes {
        let n = stroke.points.len();
        for (i, p) in stroke.points.iter().enumerate() {
            steps.push(Step {
                dx: p.x - cursor.x,
                dy: p.y - cursor.y,
                pen_lift: i + 1 == n,
            });
            cursor = *p;
        }
    }
    Ok(EncodedSketch { steps })
}

/// Inverse of [`delta_encode`].
pub fn delta_decode(encoded: &EncodedSketch) -> Result<StrokeSequence> {
    if encoded.steps.is_empty() {
        return Err(Error::invalid("cannot decode an empty encoding"));
    }
    if !encoded.steps.last().unwrap().pen_lift {
        return Err(Error::invalid("encoding does not end with a pen lift"));
    }
    let mut strokes = Vec::new();
    let mut current = Vec::new();
    let mut cursor = Point::new(0.0, 0.0);
    for step in &encoded.steps {
        cursor = Point::new(cursor.x + step.dx, cursor.y + step.dy);
        current.push(cursor);
        if step.pen_lift {
            strokes.push(Stroke::new(std::mem::take(&mut current))?);
        }
    }
    Ok(StrokeSequence { strokes })
}

/// Full classifier preprocessing: normalize then resample.
pub fn preprocess(sketch: &StrokeSequence, spacing: f64) -> Result<StrokeSequence> {
    resample(&normalize(sketch)?, spacing)
}
