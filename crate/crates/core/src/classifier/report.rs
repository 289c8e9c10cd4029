//! Mean confidence in the true category, bucketed by how many strokes the
//! completed sketch has.

use std::fmt::Write as _;

use super::Recognizer;
use crate::category::{Category, CATEGORY_COUNT};
use crate::error::Result;
use crate::stroke::StrokeSequence;

/// Column labels: 1 through 8 strokes, then everything longer.
pub const STROKE_BUCKETS: [&str; 9] = ["1", "2", "3", "4", "5", "6", "7", "8", "9+"];

pub fn stroke_bucket(strokes: usize) -> usize {
    strokes.clamp(1, 9) - 1
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrokeCountSample {
    pub category: Category,
    pub strokes: usize,
    /// Confidence the recognizer assigns to `category`.
    pub confidence: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
struct Cell {
    sum: f64,
    count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrokeCountReport {
    cells: Vec<[Cell; 9]>,
}

impl Default for StrokeCountReport {
    fn default() -> Self {
        Self {
            cells: vec![Default::default(); CATEGORY_COUNT],
        }
    }
}

impl StrokeCountReport {
    pub fn from_samples(samples: impl IntoIterator<Item = StrokeCountSample>) -> Self {
        let mut report = Self::default();
        for s in samples {
            let cell = &mut report.cells[s.category.index()][stroke_bucket(s.strokes)];
            cell.sum += s.confidence;
            cell.count += 1;
        }
        report
    }

    /// Classifies each completed sketch and records the confidence given to
    /// its label.
    pub fn evaluate<'a>(
        labeled: impl IntoIterator<Item = (Category, &'a StrokeSequence)>,
        recognizer: &dyn Recognizer,
    ) -> Result<Self> {
        let mut samples = Vec::new();
        for (category, sketch) in labeled {
            let dist = recognizer.distribution(sketch)?;
            samples.push(StrokeCountSample {
                category,
                strokes: sketch.len(),
                confidence: dist.get(category),
            });
        }
        Ok(Self::from_samples(samples))
    }

    pub fn mean(&self, category: Category, bucket: usize) -> Option<f64> {
        let cell = &self.cells[category.index()][bucket];
        (cell.count > 0).then(|| cell.sum / cell.count as f64)
    }

    pub fn count(&self, category: Category, bucket: usize) -> usize {
        self.cells[category.index()][bucket].count
    }

    /// Whole-percent cell text, `-` for empty buckets.
    pub fn cell_text(&self, category: Category, bucket: usize) -> String {
        match self.mean(category, bucket) {
            Some(m) => format!("{}", (m * 100.0).round() as i64),
            None => "-".to_string(),
        }
    }

    /// Aligned text table, one row per category in canonical order.
    pub fn render(&self) -> String {
        let mut out = format!("{:<12}", "category");
        for b in STROKE_BUCKETS {
            let _ = write!(out, " {b:>4}");
        }
        out.push('\n');
        for c in Category::ALL {
            let _ = write!(out, "{:<12}", c.name());
            for b in 0..STROKE_BUCKETS.len() {
                let _ = write!(out, " {:>4}", self.cell_text(c, b));
            }
            out.push('\n');
        }
        out
    }

    /// Tab-separated `category, bucket, count, mean` rows for non-empty cells.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("category\tstrokes\tcount\tmean_confidence\n");
        for c in Category::ALL {
            for (b, label) in STROKE_BUCKETS.iter().enumerate() {
                if let Some(m) = self.mean(c, b) {
                    let _ = writeln!(out, "{c}\t{label}\t{}\t{m}", self.count(c, b));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample_cell() {
        let r = StrokeCountReport::from_samples([StrokeCountSample {
            category: Category::Squiggle,
            strokes: 1,
            confidence: 0.98,
        }]);
        assert_eq!(r.cell_text(Category::Squiggle, 0), "98");
        assert_eq!(r.cell_text(Category::Squiggle, 1), "-");
        assert_eq!(r.cell_text(Category::Avatar, 0), "-");
    }

    #[test]
    fn means_and_overflow_bucket() {
        let s = |strokes, confidence| StrokeCountSample {
            category: Category::Avatar,
            strokes,
            confidence,
        };
        let r = StrokeCountReport::from_samples([s(7, 0.4), s(7, 0.6), s(12, 0.9), s(9, 0.7)]);
        assert_eq!(r.cell_text(Category::Avatar, 6), "50");
        assert_eq!(r.count(Category::Avatar, 8), 2);
        assert!((r.mean(Category::Avatar, 8).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn render_layout() {
        let r = StrokeCountReport::from_samples([StrokeCountSample {
            category: Category::Camera,
            strokes: 2,
            confidence: 0.92,
        }]);
        let text = r.render();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 24);
        assert!(lines[0].ends_with("9+"));
        assert_eq!(
            lines[1].split_whitespace().collect::<Vec<_>>(),
            vec!["camera", "-", "92", "-", "-", "-", "-", "-", "-", "-"]
        );
        assert_eq!(r.to_tsv().lines().nth(1), Some("camera\t2\t1\t0.92"));
    }

    #[test]
    fn bucket_edges() {
        assert_eq!(stroke_bucket(0), 0);
        assert_eq!(stroke_bucket(1), 0);
        assert_eq!(stroke_bucket(8), 7);
        assert_eq!(stroke_bucket(9), 8);
        assert_eq!(stroke_bucket(40), 8);
    }
}
