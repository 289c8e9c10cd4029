//! Screen scoring and ranking.
//!
//! A query element and a screen element of a compatible category score
//! `idf(c) * (wp * pos + ws * shape)`, where `pos` falls linearly with the
//! distance between box centers and `shape` compares widths and heights.
//! A screen's score is its best one-to-one assignment of query elements to
//! screen elements, divided by the query's total idf so it lies in [0, 1].

mod assignment;

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use assignment::max_weight_assignment;

use crate::category::QUERY_CATEGORY_COUNT;
use crate::corpus::{CategorySet, CorpusIndex, IndexedElement, IndexedScreen};
use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::query::{QueryElement, SearchQuery};

pub const PAGE_SIZE: usize = 80;

/// Relative weight of position and shape similarity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricWeights {
    pub position: f64,
    pub shape: f64,
}

impl Default for MetricWeights {
    fn default() -> Self {
        Self {
            position: 0.7,
            shape: 0.3,
        }
    }
}

impl MetricWeights {
    /// Rescales to sum to one. Both weights must be non-negative and not
    /// both zero.
    pub fn new(position: f64, shape: f64) -> Result<Self> {
        let sum = position + shape;
        if !(position >= 0.0 && shape >= 0.0 && sum > 0.0 && sum.is_finite()) {
            return Err(Error::invalid(format!(
                "metric weights must be non-negative with a positive sum, got {position}/{shape}"
            )));
        }
        Ok(Self {
            position: position / sum,
            shape: shape / sum,
        })
    }
}

/// Position and shape agreement of two normalized boxes, in [0, 1].
pub fn geometric_similarity(q: &BBox, e: &BBox, weights: &MetricWeights) -> f64 {
    let (q, e) = (q.clamped(), e.clamped());
    let pos = (1.0 - q.center_distance(&e) / std::f64::consts::SQRT_2).max(0.0);
    let shape = (q.w.min(e.w) / q.w.max(e.w)) * (q.h.min(e.h) / q.h.max(e.h));
    weights.position * pos + weights.shape * shape
}

pub fn pair_score(
    q: &QueryElement,
    e: &IndexedElement,
    idf: &[f64; QUERY_CATEGORY_COUNT],
    weights: &MetricWeights,
) -> f64 {
    let c = q.query_category();
    if !e.categories.contains(c) {
        return 0.0;
    }
    idf[c.index()] * geometric_similarity(&q.bbox, &e.bbox, weights)
}

fn query_mask(query: &SearchQuery) -> CategorySet {
    query.elements.iter().map(QueryElement::query_category).collect()
}

fn normalizer(query: &SearchQuery, idf: &[f64; QUERY_CATEGORY_COUNT]) -> f64 {
    query
        .elements
        .iter()
        .map(|q| idf[q.query_category().index()])
        .sum()
}

/// Pair-score matrix between the query and the screen elements that can
/// match at least one query element. Row-major, one row per query element.
fn score_matrix(
    query: &SearchQuery,
    screen: &IndexedScreen,
    mask: CategorySet,
    idf: &[f64; QUERY_CATEGORY_COUNT],
    weights: &MetricWeights,
) -> (Vec<f64>, usize) {
    let compatible: Vec<&IndexedElement> = screen
        .elements
        .iter()
        .filter(|e| e.categories.intersects(mask))
        .collect();
    let cols = compatible.len();
    let mut m = Vec::with_capacity(query.len() * cols);
    for q in &query.elements {
        m.extend(compatible.iter().map(|e| pair_score(q, e, idf, weights)));
    }
    (m, cols)
}

/// Normalized best-assignment score of one screen.
pub fn screen_score(
    query: &SearchQuery,
    screen: &IndexedScreen,
    idf: &[f64; QUERY_CATEGORY_COUNT],
    weights: &MetricWeights,
) -> f64 {
    let norm = normalizer(query, idf);
    if query.is_empty() || norm <= 0.0 {
        return 0.0;
    }
    let (m, cols) = score_matrix(query, screen, query_mask(query), idf, weights);
    if cols == 0 {
        return 0.0;
    }
    let (total, _) = max_weight_assignment(&m, query.len(), cols);
    (total / norm).clamp(0.0, 1.0)
}

/// Upper bound on [`screen_score`]: each query element takes its best
/// partner without the one-to-one constraint.
fn score_upper_bound(
    query: &SearchQuery,
    screen: &IndexedScreen,
    idf: &[f64; QUERY_CATEGORY_COUNT],
    weights: &MetricWeights,
    norm: f64,
) -> f64 {
    let total: f64 = query
        .elements
        .iter()
        .map(|q| {
            screen
                .elements
                .iter()
                .map(|e| pair_score(q, e, idf, weights))
                .fold(0.0, f64::max)
        })
        .sum();
    // Slack covers summation-order rounding against the exact solver.
    (total / norm + 1e-12).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedEntry {
    /// Position of the screen in the index.
    pub screen: u32,
    pub score: f64,
}

fn rank_order(index: &CorpusIndex, a: &RankedEntry, b: &RankedEntry) -> Ordering {
    b.score
        .partial_cmp(&a.score)
        .unwrap_or(Ordering::Equal)
        .then_with(|| index.screens()[a.screen as usize].id.cmp(&index.screens()[b.screen as usize].id))
}

/// Every screen, best first: score descending, then screen id ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    entries: Vec<RankedEntry>,
}

impl Ranking {
    pub fn entries(&self) -> &[RankedEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// 1-based rank of a screen position.
    pub fn rank_of(&self, screen: usize) -> Option<usize> {
        self.entries
            .iter()
            .position(|e| e.screen as usize == screen)
            .map(|p| p + 1)
    }

    /// Page `page` of `PAGE_SIZE` results; empty past the end.
    pub fn page(&self, index: &CorpusIndex, page: usize) -> ResultPage {
        let start = page.saturating_mul(PAGE_SIZE).min(self.entries.len());
        let end = (start + PAGE_SIZE).min(self.entries.len());
        ResultPage {
            page,
            total: self.entries.len(),
            results: self.entries[start..end]
                .iter()
                .map(|e| ScreenHit {
                    id: index.screens()[e.screen as usize].id.clone(),
                    score: e.score,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenHit {
    pub id: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultPage {
    pub page: usize,
    /// Number of ranked screens across all pages.
    pub total: usize,
    pub results: Vec<ScreenHit>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SearchEngine {
    pub weights: MetricWeights,
    /// Skip exact scoring of screens whose upper bound cannot reach the
    /// current top-n. Only affects [`SearchEngine::top`].
    pub prune: bool,
}

struct HeapEntry<'a> {
    entry: RankedEntry,
    index: &'a CorpusIndex,
}

impl PartialEq for HeapEntry<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry<'_> {}
impl PartialOrd for HeapEntry<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry<'_> {
    // Max-heap on "worse": the heap top is the weakest kept entry.
    fn cmp(&self, other: &Self) -> Ordering {
        rank_order(self.index, &self.entry, &other.entry)
    }
}

impl SearchEngine {
    pub fn new(weights: MetricWeights) -> Self {
        Self {
            weights,
            prune: false,
        }
    }

    pub fn score(&self, query: &SearchQuery, index: &CorpusIndex, screen: usize) -> f64 {
        screen_score(query, &index.screens()[screen], index.idf_table(), &self.weights)
    }

    /// Scores every screen (in parallel) and sorts.
    pub fn rank(&self, query: &SearchQuery, index: &CorpusIndex) -> Ranking {
        let idf = index.idf_table();
        let mut entries: Vec<RankedEntry> = index
            .screens()
            .par_iter()
            .enumerate()
            .map(|(i, s)| RankedEntry {
                screen: i as u32,
                score: screen_score(query, s, idf, &self.weights),
            })
            .collect();
        entries.par_sort_unstable_by(|a, b| rank_order(index, a, b));
        Ranking { entries }
    }

    pub fn search(&self, query: &SearchQuery, index: &CorpusIndex, page: usize) -> ResultPage {
        self.rank(query, index).page(index, page)
    }

    /// The best `n` screens in rank order, identical to the prefix of
    /// [`SearchEngine::rank`]. With `prune` set, screens are visited in
    /// decreasing upper-bound order and scoring stops once no remaining
    /// bound can displace the current n-th entry.
    pub fn top(&self, query: &SearchQuery, index: &CorpusIndex, n: usize) -> Vec<RankedEntry> {
        if !self.prune {
            let mut all = self.rank(query, index).entries;
            all.truncate(n);
            return all;
        }
        if n == 0 {
            return Vec::new();
        }
        let idf = index.idf_table();
        let norm = normalizer(query, idf);
        let mut bounds: Vec<(f64, u32)> = index
            .screens()
            .par_iter()
            .enumerate()
            .map(|(i, s)| {
                let b = if norm > 0.0 {
                    score_upper_bound(query, s, idf, &self.weights, norm)
                } else {
                    0.0
                };
                (b, i as u32)
            })
            .collect();
        bounds.par_sort_unstable_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1)));

        let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::with_capacity(n + 1);
        for (bound, screen) in bounds {
            if heap.len() == n && bound < heap.peek().unwrap().entry.score {
                break;
            }
            let entry = RankedEntry {
                screen,
                score: screen_score(query, &index.screens()[screen as usize], idf, &self.weights),
            };
            heap.push(HeapEntry { entry, index });
            if heap.len() > n {
                heap.pop();
            }
        }
        let mut out: Vec<RankedEntry> = heap.into_iter().map(|h| h.entry).collect();
        out.sort_by(|a, b| rank_order(index, a, b));
        out
    }
}
