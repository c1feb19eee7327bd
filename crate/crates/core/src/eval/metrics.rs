use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qc::DatasetBundle;
use crate::types::{Qrel, RankedList, Split, Task};

pub const DEFAULT_K: usize = 10;

/// Binary-gain nDCG@k with a `1/log2(rank + 1)` discount. `None` when the
/// query has no positives.
pub fn ndcg_at_k<'a>(ranking: impl IntoIterator<Item = &'a str>, positives: &HashSet<&str>, k: usize) -> Option<f64> {
    if positives.is_empty() {
        return None;
    }
    let discount = |i: usize| 1.0 / ((i + 2) as f64).log2();
    let mut seen = HashSet::new();
    let dcg: f64 = ranking
        .into_iter()
        .filter(|d| seen.insert(*d))
        .take(k)
        .enumerate()
        .filter(|(_, d)| positives.contains(d))
        .map(|(i, _)| discount(i))
        .sum();
    let idcg: f64 = (0..k.min(positives.len())).map(discount).sum();
    Some(if idcg > 0.0 { dcg / idcg } else { 0.0 })
}

/// Share of positives in the top `k`. `None` when the query has no positives.
pub fn recall_at_k<'a>(ranking: impl IntoIterator<Item = &'a str>, positives: &HashSet<&str>, k: usize) -> Option<f64> {
    if positives.is_empty() {
        return None;
    }
    let mut seen = HashSet::new();
    let hits = ranking
        .into_iter()
        .filter(|d| seen.insert(*d))
        .take(k)
        .filter(|d| positives.contains(d))
        .count();
    Some(hits as f64 / positives.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    Ndcg,
    Recall,
}

impl Metric {
    /// nDCG for QA collections, recall for long documents.
    pub fn for_task(task: Task) -> Self {
        match task {
            Task::Qa => Metric::Ndcg,
            Task::LongDoc => Metric::Recall,
        }
    }

    pub fn score<'a>(
        self,
        ranking: impl IntoIterator<Item = &'a str>,
        positives: &HashSet<&str>,
        k: usize,
    ) -> Option<f64> {
        match self {
            Metric::Ndcg => ndcg_at_k(ranking, positives, k),
            Metric::Recall => recall_at_k(ranking, positives, k),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Ndcg => "ndcg",
            Metric::Recall => "recall",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub metric: Metric,
    pub k: usize,
    pub per_query: BTreeMap<String, f64>,
    /// Mean over queries with at least one positive.
    pub mean: f64,
    /// Evaluated queries absent from the run; they score 0.
    pub missing: Vec<String>,
    /// Queries without positives, left out of the mean.
    pub excluded: Vec<String>,
    /// Run entries naming documents outside the corpus; they were dropped.
    pub unknown_docs: usize,
}

impl MetricReport {
    pub fn label(&self) -> String {
        format!("{}@{}", self.metric, self.k)
    }

    /// `query_id,metric,value` lines with a header.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::from("query_id,metric,value\n");
        let label = self.label();
        for (q, v) in &self.per_query {
            out.push_str(&format!("{q},{label},{v}\n"));
        }
        std::fs::File::create(path)
            .and_then(|mut f| f.write_all(out.as_bytes()))
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }
}

/// Scores `runs` for the given queries. Queries missing from the run score
/// 0; runs for queries outside `query_ids` are ignored.
pub fn evaluate_qrels(
    runs: &[RankedList],
    qrels: &[Qrel],
    query_ids: &[String],
    known_docs: Option<&HashSet<&str>>,
    metric: Metric,
    k: usize,
) -> MetricReport {
    let mut positives: HashMap<&str, HashSet<&str>> = HashMap::new();
    for r in qrels.iter().filter(|r| r.is_positive()) {
        positives
            .entry(r.query_id.as_str())
            .or_default()
            .insert(r.doc_id.as_str());
    }
    let by_query: HashMap<&str, &RankedList> = runs.iter().map(|r| (r.query_id.as_str(), r)).collect();
    let empty = HashSet::new();
    let mut report = MetricReport {
        metric,
        k,
        per_query: BTreeMap::new(),
        mean: 0.0,
        missing: Vec::new(),
        excluded: Vec::new(),
        unknown_docs: 0,
    };
    for q in query_ids {
        let pos = positives.get(q.as_str()).unwrap_or(&empty);
        if pos.is_empty() {
            report.excluded.push(q.clone());
            continue;
        }
        let Some(run) = by_query.get(q.as_str()) else {
            report.missing.push(q.clone());
            report.per_query.insert(q.clone(), 0.0);
            continue;
        };
        let ranking: Vec<&str> = run
            .doc_ids()
            .filter(|d| {
                let known = known_docs.is_none_or(|k| k.contains(d));
                if !known {
                    report.unknown_docs += 1;
                }
                known
            })
            .collect();
        let v = metric.score(ranking, pos, k).unwrap_or_default();
        report.per_query.insert(q.clone(), v);
    }
    if report.unknown_docs > 0 {
        tracing::warn!(
            count = report.unknown_docs,
            "run names documents outside the corpus; ignored"
        );
    }
    if !report.missing.is_empty() {
        tracing::warn!(count = report.missing.len(), "queries missing from the run score 0");
    }
    if !report.per_query.is_empty() {
        report.mean = report.per_query.values().sum::<f64>() / report.per_query.len() as f64;
    }
    report
}

/// Scores a run against a bundle with the task's metric at k = 10,
/// restricted to one split when `split` is given.
pub fn evaluate_run(runs: &[RankedList], bundle: &DatasetBundle, task: Task, split: Option<Split>) -> MetricReport {
    let ids: Vec<String> = bundle.queries_in(split).map(|q| q.id.clone()).collect();
    let docs: HashSet<&str> = bundle.corpus.iter().map(|d| d.id.as_str()).collect();
    evaluate_qrels(
        runs,
        &bundle.qrels,
        &ids,
        Some(&docs),
        Metric::for_task(task),
        DEFAULT_K,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set<'a>(ids: &[&'a str]) -> HashSet<&'a str> {
        ids.iter().copied().collect()
    }

    #[test]
    fn ideal_and_hand_computed_ndcg() {
        assert_eq!(ndcg_at_k(["a", "b"], &set(&["a"]), 10), Some(1.0));
        let run = ["x", "p1", "y", "z", "p2"];
        let expected = (1.0 / 3f64.log2() + 1.0 / 6f64.log2()) / (1.0 + 1.0 / 3f64.log2());
        let got = ndcg_at_k(run, &set(&["p1", "p2"]), 10).unwrap();
        assert!((got - expected).abs() < 1e-15);
        assert!((got - 0.6241).abs() < 1e-4);
        assert_eq!(ndcg_at_k(["a"], &set(&[]), 10), None);
        assert_eq!(ndcg_at_k(["a"], &set(&["b"]), 10), Some(0.0));
    }

    #[test]
    fn recall_ratios() {
        assert_eq!(recall_at_k(["a", "b", "c"], &set(&["a", "b", "c"]), 10), Some(1.0));
        assert_eq!(recall_at_k(["a", "x"], &set(&["a", "b", "c", "d"]), 10), Some(0.25));
        assert_eq!(recall_at_k(["a"], &set(&[]), 10), None);
    }

    #[test]
    fn only_top_k_counts() {
        let mut run: Vec<String> = (0..20).map(|i| format!("n{i}")).collect();
        run[12] = "p".into();
        let ids: Vec<&str> = run.iter().map(String::as_str).collect();
        assert_eq!(ndcg_at_k(ids.iter().copied(), &set(&["p"]), 10), Some(0.0));
        assert_eq!(recall_at_k(ids.iter().copied(), &set(&["p"]), 13), Some(1.0));
    }

    #[test]
    fn report_flags_missing_unknown_and_excluded() {
        let qrels = vec![
            Qrel::new("q1", "d1", 1),
            Qrel::new("q2", "d2", 1),
            Qrel::new("q3", "d3", 0),
        ];
        let runs = vec![RankedList::from_scores(
            "q1",
            vec![("ghost".into(), 2.0), ("d1".into(), 1.0)],
        )];
        let known = set(&["d1", "d2", "d3"]);
        let ids: Vec<String> = ["q1", "q2", "q3"].iter().map(|s| s.to_string()).collect();
        let r = evaluate_qrels(&runs, &qrels, &ids, Some(&known), Metric::Ndcg, 10);
        assert_eq!(r.per_query["q1"], 1.0);
        assert_eq!(r.per_query["q2"], 0.0);
        assert_eq!(r.missing, vec!["q2"]);
        assert_eq!(r.excluded, vec!["q3"]);
        assert_eq!(r.unknown_docs, 1);
        assert_eq!(r.mean, 0.5);
        assert_eq!(r.label(), "ndcg@10");
    }
}
