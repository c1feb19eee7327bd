use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::providers::Reranker;
use crate::types::RankedList;

/// Rank cutoffs for a positive vote: generated hard negatives get the looser
/// one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub hard_negative: usize,
    pub other: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            hard_negative: 20,
            other: 10,
        }
    }
}

impl Thresholds {
    pub fn for_doc(&self, is_hard_negative: bool) -> usize {
        if is_hard_negative {
            self.hard_negative
        } else {
            self.other
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RerankerVote {
    pub reranker_id: String,
    /// 1-based position in this reranker's ordering of the recall list.
    pub rank: usize,
    pub vote: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreLabel {
    pub doc_id: String,
    pub votes: Vec<RerankerVote>,
    pub pre_positive: bool,
}

impl PreLabel {
    /// Votes from `(reranker, rank)` pairs; positive on a strict majority.
    pub fn from_ranks(doc_id: impl Into<String>, ranks: &[(&str, usize)], threshold: usize) -> Self {
        let votes: Vec<RerankerVote> = ranks
            .iter()
            .map(|(id, rank)| RerankerVote {
                reranker_id: id.to_string(),
                rank: *rank,
                vote: *rank <= threshold,
            })
            .collect();
        let yes = votes.iter().filter(|v| v.vote).count();
        Self {
            doc_id: doc_id.into(),
            pre_positive: yes * 2 > votes.len(),
            votes,
        }
    }
}

/// Each reranker re-orders the recall list on its own (stable on the recall
/// order for equal scores). A reranker that fails abstains; the majority is
/// taken over those that answered.
pub fn prelabel(
    recall: &RankedList,
    query_text: &str,
    doc_text: &dyn Fn(&str) -> Option<String>,
    rerankers: &[&dyn Reranker],
    thresholds: Thresholds,
    hard_negative_ids: &BTreeSet<String>,
) -> Result<Vec<PreLabel>> {
    if rerankers.is_empty() {
        return Err(Error::config("pre-labeling needs at least one reranker"));
    }
    if recall.is_empty() {
        return Ok(Vec::new());
    }
    let texts: Vec<String> = recall
        .doc_ids()
        .map(|id| doc_text(id).ok_or_else(|| Error::integrity(format!("recalled unknown document `{id}`"))))
        .collect::<Result<_>>()?;
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();

    let mut ranks: HashMap<&str, Vec<(&str, usize)>> = HashMap::new();
    let mut last_error = None;
    let mut responders = 0;
    for r in rerankers {
        let scores = match r.rerank_score(query_text, &refs) {
            Ok(s) if s.len() == refs.len() => s,
            Ok(s) => {
                tracing::warn!(
                    reranker = r.id(),
                    got = s.len(),
                    want = refs.len(),
                    "reranker returned wrong score count"
                );
                last_error = Some(Error::integrity(format!(
                    "reranker `{}` returned {} scores",
                    r.id(),
                    s.len()
                )));
                continue;
            }
            Err(e) => {
                tracing::warn!(reranker = r.id(), query = %recall.query_id, error = %e, "reranker abstains");
                last_error = Some(e);
                continue;
            }
        };
        responders += 1;
        let mut order: Vec<usize> = (0..refs.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
        for (pos, &i) in order.iter().enumerate() {
            ranks
                .entry(recall.entries[i].0.as_str())
                .or_default()
                .push((r.id(), pos + 1));
        }
    }
    if responders == 0 {
        return Err(last_error.unwrap_or_else(|| Error::integrity("no reranker answered")));
    }
    Ok(recall
        .doc_ids()
        .map(|id| {
            let threshold = thresholds.for_doc(hard_negative_ids.contains(id));
            PreLabel::from_ranks(id, &ranks[id], threshold)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::providers::mock::{ConstantReranker, FnReranker, ScriptedReranker};

    #[test]
    fn majority_with_default_threshold() {
        let p = PreLabel::from_ranks(
            "d",
            &[("a", 5), ("b", 12), ("c", 8)],
            Thresholds::default().for_doc(false),
        );
        assert_eq!(
            p.votes.iter().map(|v| v.vote).collect::<Vec<_>>(),
            vec![true, false, true]
        );
        assert!(p.pre_positive);
        let p = PreLabel::from_ranks(
            "d",
            &[("a", 5), ("b", 12), ("c", 8)],
            Thresholds::default().for_doc(true),
        );
        assert!(p.votes.iter().all(|v| v.vote));
    }

    #[test]
    fn tie_is_not_a_majority() {
        assert!(!PreLabel::from_ranks("d", &[("a", 1), ("b", 50)], 10).pre_positive);
    }

    #[test]
    fn rank_beyond_twenty_never_votes() {
        for hn in [false, true] {
            let p = PreLabel::from_ranks("d", &[("a", 21)], Thresholds::default().for_doc(hn));
            assert!(!p.votes[0].vote);
        }
    }

    fn recall(n: usize) -> RankedList {
        RankedList::from_scores("q", (0..n).map(|i| (format!("d{i:02}"), -(i as f64))).collect())
    }

    fn text(id: &str) -> Option<String> {
        Some(format!("text of {id}"))
    }

    #[test]
    fn rerankers_reorder_independently() {
        // reverses the recall order: d29 first, d00 last
        let rev = FnReranker {
            id: "rev".to_string(),
            score: |_: &str, d: &str| Ok(d[9..].parse::<f64>().unwrap()),
        };
        let same = FnReranker {
            id: "same".to_string(),
            score: |_: &str, d: &str| Ok(-d[9..].parse::<f64>().unwrap()),
        };
        let hn: BTreeSet<String> = ["d25".to_string()].into();
        let rerankers: [&dyn Reranker; 2] = [&rev, &same];
        let labels = prelabel(&recall(30), "q", &text, &rerankers, Thresholds::default(), &hn).unwrap();
        let get = |id: &str| labels.iter().find(|l| l.doc_id == id).unwrap();
        assert_eq!(get("d00").votes[0].rank, 30);
        assert_eq!(get("d00").votes[1].rank, 1);
        assert!(!get("d00").pre_positive);
        // d25: rank 5 for rev, 26 for same; one of two is not a majority
        assert_eq!(get("d25").votes.iter().map(|v| v.rank).collect::<Vec<_>>(), vec![5, 26]);
        assert!(!get("d25").pre_positive);
    }

    #[test]
    fn failing_reranker_abstains() {
        let bad = FnReranker {
            id: "bad".to_string(),
            score: |_: &str, _: &str| Err(Error::Reply("down".into())),
        };
        let good = ScriptedReranker::new("good").with("q", "text of d03", 9.0);
        let rerankers: [&dyn Reranker; 2] = [&bad, &good];
        let labels = prelabel(
            &recall(15),
            "q",
            &text,
            &rerankers,
            Thresholds::default(),
            &BTreeSet::new(),
        )
        .unwrap();
        assert!(labels.iter().all(|l| l.votes.len() == 1));
        assert_eq!(labels.iter().find(|l| l.doc_id == "d03").unwrap().votes[0].rank, 1);
        // with one responder every doc in its top 10 is pre-positive
        assert_eq!(labels.iter().filter(|l| l.pre_positive).count(), 10);

        let only_bad: [&dyn Reranker; 1] = [&bad];
        assert!(prelabel(
            &recall(3),
            "q",
            &text,
            &only_bad,
            Thresholds::default(),
            &BTreeSet::new()
        )
        .is_err());
    }

    #[test]
    fn constant_scores_keep_recall_order() {
        let c = ConstantReranker {
            id: "c".into(),
            score: 1.0,
        };
        let rerankers: [&dyn Reranker; 1] = [&c];
        let labels = prelabel(
            &recall(12),
            "q",
            &text,
            &rerankers,
            Thresholds::default(),
            &BTreeSet::new(),
        )
        .unwrap();
        assert!(labels[9].pre_positive && !labels[10].pre_positive);
    }
}
