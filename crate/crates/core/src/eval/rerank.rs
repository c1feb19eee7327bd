use rayon::prelude::*;

use crate::error::Result;
use crate::providers::Reranker;
use crate::types::RankedList;

pub const DEFAULT_RERANK_DEPTH: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct RerankOutput {
    pub runs: Vec<RankedList>,
    /// Queries whose first-stage order was kept because reranking failed.
    pub failed: Vec<String>,
}

/// Re-scores the top `depth` entries of each list and re-sorts them by the
/// new score. Equal scores keep their first-stage order. Entries beyond
/// `depth` are dropped.
pub fn rerank_eval(
    first_stage: &[RankedList],
    query_text: &(dyn Fn(&str) -> Option<String> + Sync),
    doc_text: &(dyn Fn(&str) -> Option<String> + Sync),
    reranker: &dyn Reranker,
    depth: usize,
    workers: usize,
) -> Result<RerankOutput> {
    let pool = super::pool(workers)?;
    let results: Vec<(RankedList, bool)> = pool.install(|| {
        first_stage
            .par_iter()
            .map(|list| rerank_one(list, query_text, doc_text, reranker, depth))
            .collect()
    });
    let mut out = RerankOutput {
        runs: Vec::with_capacity(results.len()),
        failed: Vec::new(),
    };
    for (list, failed) in results {
        if failed {
            out.failed.push(list.query_id.clone());
        }
        out.runs.push(list);
    }
    if !out.failed.is_empty() {
        tracing::warn!(
            count = out.failed.len(),
            "reranking failed for some queries; first-stage order kept"
        );
    }
    Ok(out)
}

fn rerank_one(
    list: &RankedList,
    query_text: &(dyn Fn(&str) -> Option<String> + Sync),
    doc_text: &(dyn Fn(&str) -> Option<String> + Sync),
    reranker: &dyn Reranker,
    depth: usize,
) -> (RankedList, bool) {
    let mut top = list.clone();
    top.truncate(depth);
    if top.is_empty() {
        return (top, false);
    }
    let attempt = || -> Option<RankedList> {
        let query = query_text(&list.query_id)?;
        let texts: Vec<String> = top.doc_ids().map(doc_text).collect::<Option<_>>()?;
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let scores = match reranker.rerank_score(&query, &refs) {
            Ok(s) if s.len() == refs.len() && s.iter().all(|x| x.is_finite()) => s,
            Ok(_) => return None,
            Err(e) => {
                tracing::warn!(query = %list.query_id, error = %e, "reranker failed");
                return None;
            }
        };
        let mut entries: Vec<(String, f64)> = top.doc_ids().map(str::to_string).zip(scores).collect();
        entries.sort_by(|a, b| b.1.total_cmp(&a.1));
        Some(RankedList {
            query_id: list.query_id.clone(),
            entries,
        })
    };
    match attempt() {
        Some(r) => (r, false),
        None => (top, true),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::providers::mock::{ConstantReranker, FnReranker};

    fn first_stage() -> Vec<RankedList> {
        let entries = (0..150).map(|i| (format!("d{i:03}"), 1000.0 - i as f64)).collect();
        vec![RankedList::from_scores("q", entries)]
    }

    fn text(s: &str) -> Option<String> {
        Some(s.to_string())
    }

    #[test]
    fn constant_scores_keep_order_and_cut_depth() {
        let out = rerank_eval(
            &first_stage(),
            &text,
            &text,
            &ConstantReranker {
                id: "c".into(),
                score: 1.0,
            },
            100,
            2,
        )
        .unwrap();
        let ids: Vec<_> = out.runs[0].doc_ids().collect();
        assert_eq!(ids.len(), 100);
        assert_eq!(ids[0], "d000");
        assert_eq!(ids[99], "d099");
        assert!(out.failed.is_empty());
    }

    #[test]
    fn reversing_scores_reverse_the_window() {
        let rev = FnReranker {
            id: "rev".into(),
            score: |_: &str, d: &str| Ok(d[1..].parse::<f64>().unwrap()),
        };
        let out = rerank_eval(&first_stage(), &text, &text, &rev, 100, 4).unwrap();
        let ids: Vec<_> = out.runs[0].doc_ids().collect();
        assert_eq!(ids[0], "d099");
        assert_eq!(ids[99], "d000");
    }

    #[test]
    fn failure_keeps_first_stage_order() {
        let bad = FnReranker {
            id: "bad".into(),
            score: |_: &str, _: &str| Err(crate::Error::config("down")),
        };
        let out = rerank_eval(&first_stage(), &text, &text, &bad, 10, 1).unwrap();
        assert_eq!(out.failed, vec!["q"]);
        assert_eq!(out.runs[0].doc_ids().next(), Some("d000"));
        assert_eq!(out.runs[0].len(), 10);
    }
}
