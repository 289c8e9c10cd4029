use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Distribution, Recognizer};
use crate::category::{Category, CATEGORY_COUNT};
use crate::doodle::{self, DoodleRecord};
use crate::error::{Error, Result};
use crate::stroke::{preprocess, Point, StrokeSequence, DEFAULT_SPACING};

/// Points per matching cloud.
pub const CLOUD_SIZE: usize = 64;

/// Softmax temperature applied to negated Chamfer distances.
pub const DEFAULT_TEMPERATURE: f64 = 0.05;

const DEFAULT_TEMPLATES: &str = include_str!("../../data/templates.ndjson");
const DEFAULT_MANIFEST: &str = include_str!("../../data/templates.manifest.json");

pub type Cloud = [Point; CLOUD_SIZE];

/// Reduces a sketch to `CLOUD_SIZE` points spaced uniformly by arc length
/// over the concatenated strokes of its normalized, resampled form. Pen-up
/// jumps between strokes do not count towards arc length.
pub fn point_cloud(sketch: &StrokeSequence) -> Result<Cloud> {
    let prepared = preprocess(sketch, DEFAULT_SPACING)?;
    let segments: Vec<(Point, Point, f64)> = prepared
        .strokes()
        .iter()
        .flat_map(|s| s.points().windows(2).map(|w| (w[0], w[1], w[0].distance(&w[1]))))
        .filter(|seg| seg.2 > 0.0)
        .collect();
    let total: f64 = segments.iter().map(|s| s.2).sum();

    let first = prepared.strokes()[0].points()[0];
    let mut cloud = [first; CLOUD_SIZE];
    if segments.is_empty() || total <= 0.0 {
        return Ok(cloud);
    }

    let step = total / (CLOUD_SIZE - 1) as f64;
    let mut seg = 0;
    let mut walked = 0.0;
    for (k, slot) in cloud.iter_mut().enumerate() {
        let target = step * k as f64;
        while seg + 1 < segments.len() && walked + segments[seg].2 < target {
            walked += segments[seg].2;
            seg += 1;
        }
        let (a, b, len) = segments[seg];
        let t = ((target - walked) / len).clamp(0.0, 1.0);
        *slot = Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y));
    }
    Ok(cloud)
}

fn mean_nearest(from: &[Point], to: &[Point], abandon_above: f64) -> f64 {
    let n = from.len() as f64;
    let budget = abandon_above * n;
    let mut sum = 0.0;
    for p in from {
        let best = to
            .iter()
            .map(|q| p.distance_sq(q))
            .fold(f64::INFINITY, f64::min);
        sum += best.sqrt();
        if sum > budget {
            return f64::INFINITY;
        }
    }
    sum / n
}

/// Symmetric Chamfer distance: the average of the two directed mean
/// nearest-neighbour distances.
pub fn chamfer_distance(a: &[Point], b: &[Point]) -> f64 {
    0.5 * (mean_nearest(a, b, f64::INFINITY) + mean_nearest(b, a, f64::INFINITY))
}

/// Chamfer distance, or `INFINITY` once the result is known to exceed `bound`.
fn chamfer_bounded(a: &[Point], b: &[Point], bound: f64) -> f64 {
    let forward = mean_nearest(a, b, 2.0 * bound);
    if forward.is_infinite() {
        return f64::INFINITY;
    }
    let backward = mean_nearest(b, a, 2.0 * bound - forward);
    0.5 * (forward + backward)
}

#[derive(Debug, Clone)]
pub struct Template {
    pub category: Category,
    pub sketch: StrokeSequence,
    pub cloud: Cloud,
}

impl Template {
    pub fn new(category: Category, sketch: StrokeSequence) -> Result<Self> {
        let cloud = point_cloud(&sketch)?;
        Ok(Self {
            category,
            sketch,
            cloud,
        })
    }
}

/// Maps each category name to the half-open record range holding its
/// templates in the companion doodle file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TemplateManifest {
    pub ranges: BTreeMap<String, [usize; 2]>,
}

#[derive(Debug, Clone)]
pub struct TemplateLibrary {
    templates: Vec<Template>,
}

impl TemplateLibrary {
    /// Every category needs at least one template.
    pub fn new(templates: Vec<Template>) -> Result<Self> {
        let mut seen = [false; CATEGORY_COUNT];
        for t in &templates {
            seen[t.category.index()] = true;
        }
        if let Some(missing) = Category::ALL.iter().find(|c| !seen[c.index()]) {
            return Err(Error::invalid(format!(
                "template library has no template for `{missing}`"
            )));
        }
        Ok(Self { templates })
    }

    /// The library compiled into the crate.
    pub fn shipped() -> Self {
        Self::parse(DEFAULT_TEMPLATES.as_bytes(), DEFAULT_MANIFEST)
            .expect("shipped template library is valid")
    }

    pub fn parse(records: impl BufRead, manifest: &str) -> Result<Self> {
        let records = doodle::read_records(records)?;
        let manifest: TemplateManifest = serde_json::from_str(manifest)?;
        Self::from_records(&records, &manifest)
    }

    pub fn load(records: impl AsRef<Path>, manifest: impl AsRef<Path>) -> Result<Self> {
        let manifest_path = manifest.as_ref();
        let manifest = std::fs::read_to_string(manifest_path)
            .map_err(|e| Error::io(manifest_path, e))?;
        let records = doodle::read_file(records)?;
        Self::from_records(&records, &serde_json::from_str(&manifest)?)
    }

    pub fn from_records(records: &[DoodleRecord], manifest: &TemplateManifest) -> Result<Self> {
        let mut templates = Vec::new();
        for (name, &[start, end]) in &manifest.ranges {
            let category: Category = name.parse()?;
            if start > end || end > records.len() {
                return Err(Error::Format(format!(
                    "manifest range {start}..{end} for `{name}` exceeds {} records",
                    records.len()
                )));
            }
            for record in &records[start..end] {
                templates.push(Template::new(category, record.sketch.clone())?);
            }
        }
        Self::new(templates)
    }

    /// Record list and manifest for this library, grouped by category in
    /// canonical order.
    pub fn to_records(&self) -> (Vec<DoodleRecord>, TemplateManifest) {
        let mut records = Vec::with_capacity(self.templates.len());
        let mut manifest = TemplateManifest::default();
        for c in Category::ALL {
            let start = records.len();
            records.extend(
                self.templates
                    .iter()
                    .filter(|t| t.category == c)
                    .map(|t| DoodleRecord::new(Some(c.name().to_string()), t.sketch.clone())),
            );
            manifest
                .ranges
                .insert(c.name().to_string(), [start, records.len()]);
        }
        (records, manifest)
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn count(&self, c: Category) -> usize {
        self.templates.iter().filter(|t| t.category == c).count()
    }

    /// Minimum Chamfer distance from `cloud` to any template of each category.
    pub fn category_distances(&self, cloud: &Cloud) -> [f64; CATEGORY_COUNT] {
        let mut best = [f64::INFINITY; CATEGORY_COUNT];
        for t in &self.templates {
            let slot = &mut best[t.category.index()];
            let d = chamfer_bounded(cloud, &t.cloud, *slot);
            if d < *slot {
                *slot = d;
            }
        }
        best
    }
}

/// Nearest-template recognizer over Chamfer distance.
#[derive(Debug, Clone)]
pub struct TemplateRecognizer {
    library: TemplateLibrary,
    temperature: f64,
}

impl TemplateRecognizer {
    pub fn new(library: TemplateLibrary) -> Self {
        Self {
            library,
            temperature: DEFAULT_TEMPERATURE,
        }
    }

    pub fn shipped() -> Self {
        Self::new(TemplateLibrary::shipped())
    }

    pub fn with_temperature(mut self, temperature: f64) -> Result<Self> {
        if !temperature.is_finite() || temperature <= 0.0 {
            return Err(Error::invalid(format!(
                "temperature must be positive, got {temperature}"
            )));
        }
        self.temperature = temperature;
        Ok(self)
    }

    pub fn library(&self) -> &TemplateLibrary {
        &self.library
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }
}

impl Recognizer for TemplateRecognizer {
    fn distribution(&self, sketch: &StrokeSequence) -> Result<Distribution> {
        let cloud = point_cloud(sketch)?;
        let distances = self.library.category_distances(&cloud);
        let mut logits = [0.0; CATEGORY_COUNT];
        for (l, d) in logits.iter_mut().zip(distances) {
            *l = -d / self.temperature;
        }
        Ok(Distribution::softmax(&logits))
    }
}
