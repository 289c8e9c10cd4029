//! Top-k retrieval accuracy over replayed session snapshots.

use std::cmp::Ordering;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::corpus::CorpusIndex;
use crate::error::{Error, Result};
use crate::query::SessionSnapshot;
use crate::search::{screen_score, SearchEngine};

#[derive(Debug, Clone, PartialEq)]
pub struct SessionOutcome {
    pub target: String,
    /// 1-based rank of the target; `None` when it is not in the index.
    pub rank: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopKReport {
    pub ks: Vec<usize>,
    /// Per session, in input order.
    pub outcomes: Vec<SessionOutcome>,
}

impl TopKReport {
    pub fn sessions(&self) -> usize {
        self.outcomes.len()
    }

    pub fn hits(&self, k: usize) -> usize {
        self.outcomes
            .iter()
            .filter(|o| o.rank.is_some_and(|r| r <= k))
            .count()
    }

    pub fn accuracy(&self, k: usize) -> f64 {
        if self.outcomes.is_empty() {
            return 0.0;
        }
        self.hits(k) as f64 / self.outcomes.len() as f64
    }

    /// Targets absent from the index, counted as misses.
    pub fn missing_targets(&self) -> impl Iterator<Item = &str> {
        self.outcomes
            .iter()
            .filter(|o| o.rank.is_none())
            .map(|o| o.target.as_str())
    }

    /// Tab-separated table with a header row.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("k\thits\tsessions\taccuracy\n");
        for &k in &self.ks {
            let _ = writeln!(out, "{k}\t{}\t{}\t{:.4}", self.hits(k), self.sessions(), self.accuracy(k));
        }
        out
    }

    /// Per-session ranks, tab-separated, `-` for a missing target.
    pub fn ranks_tsv(&self) -> String {
        let mut out = String::from("session\ttarget\trank\n");
        for (i, o) in self.outcomes.iter().enumerate() {
            let rank = o.rank.map_or("-".to_string(), |r| r.to_string());
            let _ = writeln!(out, "{i}\t{}\t{rank}", o.target);
        }
        out
    }
}

/// Rank the target would take in the full ranking, without sorting: one
/// plus the number of screens ordered ahead of it.
pub fn target_rank(
    engine: &SearchEngine,
    snapshot_query: &crate::query::SearchQuery,
    index: &CorpusIndex,
    target: usize,
) -> usize {
    let idf = index.idf_table();
    let screens = index.screens();
    let t_score = screen_score(snapshot_query, &screens[target], idf, &engine.weights);
    let t_id = &screens[target].id;
    let ahead = screens
        .iter()
        .enumerate()
        .filter(|&(i, s)| {
            if i == target {
                return false;
            }
            let score = screen_score(snapshot_query, s, idf, &engine.weights);
            match score.partial_cmp(&t_score) {
                Some(Ordering::Greater) => true,
                Some(Ordering::Equal) => s.id < *t_id,
                _ => false,
            }
        })
        .count();
    ahead + 1
}

/// Scores sessions in parallel; outcomes keep input order. Every snapshot
/// needs a target and at least one element.
pub fn eval_topk(
    snapshots: &[SessionSnapshot],
    index: &CorpusIndex,
    engine: &SearchEngine,
    ks: &[usize],
) -> Result<TopKReport> {
    if ks.is_empty() || ks.contains(&0) {
        return Err(Error::invalid("k values must be positive"));
    }
    let prepared = snapshots
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let target = s
                .target
                .clone()
                .ok_or_else(|| Error::invalid(format!("session {i} has no target screen")))?;
            let query = s
                .query()
                .map_err(|e| Error::invalid(format!("session {i}: {e}")))?;
            Ok((target, query))
        })
        .collect::<Result<Vec<_>>>()?;
    let outcomes = prepared
        .par_iter()
        .map(|(target, query)| SessionOutcome {
            target: target.clone(),
            rank: index
                .position(target)
                .map(|t| target_rank(engine, query, index, t)),
        })
        .collect();
    Ok(TopKReport {
        ks: ks.to_vec(),
        outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::CategoryMapping;
    use crate::synth::{self, QueryJitter};

    fn setup() -> (CorpusIndex, Vec<SessionSnapshot>) {
        let mapping = CategoryMapping::default();
        let docs = synth::corpus(60, 21);
        let qs = synth::queries(&docs, &mapping, &QueryJitter::default(), 50, 4);
        (CorpusIndex::build(docs, &mapping).unwrap(), qs)
    }

    #[test]
    fn ranks_match_full_sort() {
        let (idx, qs) = setup();
        let engine = SearchEngine::default();
        let report = eval_topk(&qs, &idx, &engine, &[1, 3, 10]).unwrap();
        for (q, o) in qs.iter().zip(&report.outcomes) {
            let ranking = engine.rank(&q.query().unwrap(), &idx);
            let expected = ranking.rank_of(idx.position(&o.target).unwrap());
            assert_eq!(o.rank, expected);
        }
        // Hand count from the oracle ranks.
        let hits10 = report.outcomes.iter().filter(|o| o.rank.unwrap() <= 10).count();
        assert_eq!(report.hits(10), hits10);
    }

    #[test]
    fn exact_copy_ranks_first() {
        let mapping = CategoryMapping::default();
        let docs = synth::corpus(40, 2);
        let exact = QueryJitter {
            center: 0.0,
            size: 0.0,
            min_elements: 6,
            max_elements: 6,
        };
        let q = synth::queries(&docs, &mapping, &exact, 1, 9).remove(0);
        let idx = CorpusIndex::build(docs, &mapping).unwrap();
        let report = eval_topk(&[q], &idx, &SearchEngine::default(), &[1]).unwrap();
        assert_eq!(report.outcomes[0].rank, Some(1));
    }

    #[test]
    fn reordering_keeps_accuracy() {
        let (idx, mut qs) = setup();
        let engine = SearchEngine::default();
        let a = eval_topk(&qs, &idx, &engine, &[1, 10]).unwrap();
        qs.reverse();
        let b = eval_topk(&qs, &idx, &engine, &[1, 10]).unwrap();
        assert_eq!(a.to_tsv(), b.to_tsv());
    }

    #[test]
    fn missing_target_is_a_miss() {
        let (idx, mut qs) = setup();
        qs.truncate(3);
        qs[1].target = Some("nowhere".into());
        let report = eval_topk(&qs, &idx, &SearchEngine::default(), &[1000]).unwrap();
        assert_eq!(report.hits(1000), 2);
        assert_eq!(report.missing_targets().collect::<Vec<_>>(), vec!["nowhere"]);
        assert!(report.ranks_tsv().contains("nowhere\t-"));
    }

    #[test]
    fn target_required() {
        let (idx, mut qs) = setup();
        qs[0].target = None;
        assert!(eval_topk(&qs, &idx, &SearchEngine::default(), &[1]).is_err());
        assert!(eval_topk(&qs[1..], &idx, &SearchEngine::default(), &[0]).is_err());
    }
}
