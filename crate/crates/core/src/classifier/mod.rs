//! Per-stroke element recognition.
//!
//! Two backends share one contract: given the strokes drawn so far, produce a
//! probability distribution over the 23 primitives and report its top three.
//! [`TemplateRecognizer`] matches point clouds against a shipped template
//! library; [`NeuralModel`] runs exported conv + bidirectional LSTM weights.

mod neural;
mod report;
mod template;
mod weights;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::category::{Category, CATEGORY_COUNT};
use crate::error::Result;
use crate::stroke::StrokeSequence;

pub use neural::{Activation, Conv1d, Dense, LstmDirection, Layer, NeuralModel, NeuralRecognizer, BiLstm};
pub use report::{stroke_bucket, StrokeCountReport, StrokeCountSample, STROKE_BUCKETS};
pub use template::{
    chamfer_distance, point_cloud, Template, TemplateLibrary, TemplateManifest, TemplateRecognizer,
    CLOUD_SIZE, DEFAULT_TEMPERATURE,
};
pub use weights::{decode_weights, encode_weights, read_weights, write_weights, WEIGHTS_MAGIC};

/// A probability for each of the 23 categories, indexed by [`Category::index`].
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution([f64; CATEGORY_COUNT]);

impl Distribution {
    /// Numerically stable softmax.
    pub fn softmax(logits: &[f64; CATEGORY_COUNT]) -> Self {
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut out = [0.0; CATEGORY_COUNT];
        let mut sum = 0.0;
        for (o, &l) in out.iter_mut().zip(logits) {
            *o = (l - max).exp();
            sum += *o;
        }
        for o in &mut out {
            *o /= sum;
        }
        Distribution(out)
    }

    pub fn uniform() -> Self {
        Distribution([1.0 / CATEGORY_COUNT as f64; CATEGORY_COUNT])
    }

    pub fn get(&self, c: Category) -> f64 {
        self.0[c.index()]
    }

    pub fn values(&self) -> &[f64; CATEGORY_COUNT] {
        &self.0
    }

    /// Categories ordered by descending probability, ties by name.
    pub fn ranked(&self) -> Vec<(Category, f64)> {
        let mut all: Vec<(Category, f64)> = Category::ALL.iter().map(|&c| (c, self.get(c))).collect();
        all.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.0.name().cmp(b.0.name()))
        });
        all
    }

    pub fn top3(&self) -> ElementPrediction {
        let ranked = self.ranked();
        ElementPrediction {
            entries: [
                Scored::from(ranked[0]),
                Scored::from(ranked[1]),
                Scored::from(ranked[2]),
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scored {
    pub category: Category,
    pub confidence: f64,
}

impl From<(Category, f64)> for Scored {
    fn from((category, confidence): (Category, f64)) -> Self {
        Self { category, confidence }
    }
}

/// The three most likely categories, confidence descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementPrediction {
    pub entries: [Scored; 3],
}

impl ElementPrediction {
    pub fn best(&self) -> Category {
        self.entries[0].category
    }

    pub fn contains(&self, c: Category) -> bool {
        self.entries.iter().any(|e| e.category == c)
    }
}

/// A backend that maps a (possibly partial) element doodle to a distribution.
/// Implementations are stateless: classifying a prefix never depends on
/// earlier calls.
pub trait Recognizer: Send + Sync {
    fn distribution(&self, sketch: &StrokeSequence) -> Result<Distribution>;

    fn classify(&self, sketch: &StrokeSequence) -> Result<ElementPrediction> {
        Ok(self.distribution(sketch)?.top3())
    }
}
