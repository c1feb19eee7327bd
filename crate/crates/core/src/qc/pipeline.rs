//! Query filtering, label correction, splitting and assembly.
//!
//! Per-query work runs on a bounded pool and is computed against the state
//! the stage started from; the resulting edits are then applied one query
//! at a time in query order. An edit for one query only touches that
//! query's own judgments, so the outcome matches a sequential run.

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::actions::{apply_action_matrix, classify, Action, DocClass};
use super::bundle::{assemble_dataset, DatasetBundle};
use super::checkpoint::{cached, Checkpoint};
use super::judge::Judge;
use super::prelabel::{prelabel, RerankerVote, Thresholds};
use super::recall::{EmbeddingIndex, DEFAULT_RECALL_K};
use super::split::{split_queries, DEFAULT_DEV_FRACTION};
use crate::error::{Error, Result};
use crate::generator::{CandidateSets, TemplateSet};
use crate::providers::{ChatProvider, Embedder, Reranker};
use crate::types::{Document, Split, Task};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QcConfig {
    pub task: Task,
    pub recall_k: usize,
    pub thresholds: Thresholds,
    pub dev_fraction: f64,
    /// Split for every query of a long-document dataset.
    pub long_doc_split: Split,
    pub split_seed: u64,
    pub workers: usize,
}

impl Default for QcConfig {
    fn default() -> Self {
        Self {
            task: Task::Qa,
            recall_k: DEFAULT_RECALL_K,
            thresholds: Thresholds::default(),
            dev_fraction: DEFAULT_DEV_FRACTION,
            long_doc_split: Split::Test,
            split_seed: 42,
            workers: 8,
        }
    }
}

impl QcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.recall_k == 0 || self.thresholds.hard_negative == 0 || self.thresholds.other == 0 {
            return Err(Error::config("recall depth and rank thresholds must be positive"));
        }
        if self.workers == 0 {
            return Err(Error::config("workers must be positive"));
        }
        if !(0.0..=1.0).contains(&self.dev_fraction) {
            return Err(Error::config("dev_fraction must lie in [0, 1]"));
        }
        Ok(())
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))
    }
}

pub struct QcProviders<'a> {
    pub chat: &'a dyn ChatProvider,
    pub embedder: &'a dyn Embedder,
    pub rerankers: Vec<&'a dyn Reranker>,
    pub templates: &'a TemplateSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportAction {
    KeepQuery,
    DropQuery,
    Skip,
    DiscardHardNegative,
    AddPositive,
    IntegrityViolation,
    JudgeError,
    QueryFailed,
}

impl From<Action> for ReportAction {
    fn from(a: Action) -> Self {
        match a {
            Action::Skip => ReportAction::Skip,
            Action::DiscardHardNegative => ReportAction::DiscardHardNegative,
            Action::AddPositive => ReportAction::AddPositive,
            Action::IntegrityViolation => ReportAction::IntegrityViolation,
        }
    }
}

/// One line of the QC audit log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QcRecord {
    pub query_id: String,
    pub action: ReportAction,
    pub doc_id: String,
    pub doc_class: Option<DocClass>,
    pub llm_level: Option<u8>,
    pub votes: Vec<RerankerVote>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Verdict {
    level: Option<u8>,
    error: Option<String>,
}

impl Verdict {
    fn keep(&self) -> bool {
        self.level.is_some_and(|l| l >= 2)
    }
}

#[derive(Debug, Clone, Default)]
pub struct FilterOutput {
    pub candidates: CandidateSets,
    pub report: Vec<QcRecord>,
}

/// Judges each query against its own positive and drops those judged
/// irrelevant (or that could not be judged), together with their
/// judgments and hard negatives.
pub fn filter_low_quality_queries(
    candidates: &CandidateSets,
    judge: &Judge<'_>,
    config: &QcConfig,
    checkpoint: Option<&Checkpoint>,
) -> Result<FilterOutput> {
    let docs = candidates.documents();
    let verdicts: Vec<Result<Verdict>> = config.pool()?.install(|| {
        candidates
            .queries
            .par_iter()
            .map(|q| {
                let positive = docs
                    .get(q.positive_doc_id.as_str())
                    .ok_or_else(|| Error::integrity(format!("query `{}` has no positive document", q.id)))?;
                cached(checkpoint, "filter", &q.id, || {
                    match judge.judge(&q.text, &positive.text) {
                        Ok(l) => Verdict {
                            level: Some(l.level()),
                            error: None,
                        },
                        Err(e) => {
                            tracing::warn!(query = %q.id, error = %e, "judging failed; discarding query");
                            Verdict {
                                level: None,
                                error: Some(e.to_string()),
                            }
                        }
                    }
                })
            })
            .collect()
    });

    let mut report = Vec::with_capacity(verdicts.len());
    let mut drop = HashSet::new();
    for (q, v) in candidates.queries.iter().zip(verdicts) {
        let v = v?;
        let keep = v.keep();
        if !keep {
            drop.insert(q.id.clone());
        }
        report.push(QcRecord {
            query_id: q.id.clone(),
            action: if keep {
                ReportAction::KeepQuery
            } else {
                ReportAction::DropQuery
            },
            doc_id: q.positive_doc_id.clone(),
            doc_class: Some(DocClass::Type1OriginalPositive),
            llm_level: v.level,
            votes: Vec::new(),
            reason: v.error,
        });
    }
    let mut out = candidates.clone();
    out.remove_queries(&drop);
    tracing::info!(kept = out.queries.len(), dropped = drop.len(), "query filter finished");
    Ok(FilterOutput {
        candidates: out,
        report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct JudgedDoc {
    doc_id: String,
    doc_class: DocClass,
    llm_level: Option<u8>,
    error: Option<String>,
    votes: Vec<RerankerVote>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Correction {
    Done(Vec<JudgedDoc>),
    Failed(String),
}

#[derive(Debug, Clone, Default)]
pub struct CorrectionOutput {
    pub candidates: CandidateSets,
    pub report: Vec<QcRecord>,
    /// Queries dropped because recall or pre-labeling failed, with reasons.
    pub dropped: Vec<(String, String)>,
}

/// Recall over the seed corpus plus all generated documents, pre-label with
/// the rerankers, judge the pre-positives, and apply the action table.
pub fn correct_labels(
    candidates: &CandidateSets,
    seed_corpus: &[Document],
    providers: &QcProviders<'_>,
    config: &QcConfig,
    checkpoint: Option<&Checkpoint>,
) -> Result<CorrectionOutput> {
    config.validate()?;
    let mut seen = HashSet::new();
    let all_docs: Vec<&Document> = seed_corpus
        .iter()
        .chain(&candidates.positives)
        .chain(&candidates.hard_negatives)
        .filter(|d| seen.insert(d.id.as_str()))
        .collect();
    let by_id: HashMap<&str, &Document> = all_docs.iter().map(|d| (d.id.as_str(), *d)).collect();
    let hard_negative_ids = candidates.hard_negative_ids();
    let judge = Judge::new(providers.chat, providers.templates);
    let pool = config.pool()?;

    let pending = candidates
        .queries
        .iter()
        .any(|q| checkpoint.and_then(|c| c.get::<Correction>("correct", &q.id)).is_none());
    let index = if pending {
        Some(pool.install(|| EmbeddingIndex::build(all_docs.iter().copied(), providers.embedder))?)
    } else {
        None
    };

    let doc_text = |id: &str| by_id.get(id).map(|d| d.text.clone());
    let corrections: Vec<Result<Correction>> = pool.install(|| {
        candidates
            .queries
            .par_iter()
            .map(|q| {
                cached(checkpoint, "correct", &q.id, || {
                    let index = index.as_ref().expect("index exists while work is pending");
                    let recall = match super::recall::recall_top_k(&q.id, &q.text, index, providers.embedder, config.recall_k) {
                        Ok(r) => r,
                        Err(e) => return Correction::Failed(format!("recall_failed: {e}")),
                    };
                    let labels = match prelabel(
                        &recall,
                        &q.text,
                        &doc_text,
                        &providers.rerankers,
                        config.thresholds,
                        &hard_negative_ids,
                    ) {
                        Ok(l) => l,
                        Err(e) => return Correction::Failed(format!("prelabel_failed: {e}")),
                    };
                    let judged = labels
                        .into_iter()
                        .filter(|l| l.pre_positive)
                        .map(|l| {
                            let doc = by_id[l.doc_id.as_str()];
                            let (llm_level, error) = match judge.judge(&q.text, &doc.text) {
                                Ok(level) => (Some(level.level()), None),
                                Err(e) => {
                                    tracing::warn!(query = %q.id, doc = %doc.id, error = %e, "judging failed; treating as negative");
                                    (None, Some(e.to_string()))
                                }
                            };
                            JudgedDoc {
                                doc_class: classify(candidates, &q.id, &doc.id),
                                doc_id: l.doc_id,
                                llm_level,
                                error,
                                votes: l.votes,
                            }
                        })
                        .collect();
                    Correction::Done(judged)
                })
            })
            .collect()
    });

    let mut state = candidates.clone();
    let mut report = Vec::new();
    let mut dropped = Vec::new();
    for (q, c) in candidates.queries.iter().zip(corrections) {
        match c? {
            Correction::Failed(reason) => {
                tracing::warn!(query = %q.id, %reason, "dropping query");
                report.push(QcRecord {
                    query_id: q.id.clone(),
                    action: ReportAction::QueryFailed,
                    doc_id: q.positive_doc_id.clone(),
                    doc_class: None,
                    llm_level: None,
                    votes: Vec::new(),
                    reason: Some(reason.clone()),
                });
                dropped.push((q.id.clone(), reason));
            }
            Correction::Done(judged) => {
                for j in judged {
                    let positive = j.llm_level.is_some_and(|l| l >= 2);
                    let action = if j.error.is_some() {
                        ReportAction::JudgeError
                    } else {
                        let doc = by_id[j.doc_id.as_str()];
                        apply_action_matrix(&q.id, doc, j.doc_class, positive, &mut state)?
                            .action
                            .into()
                    };
                    report.push(QcRecord {
                        query_id: q.id.clone(),
                        action,
                        doc_id: j.doc_id,
                        doc_class: Some(j.doc_class),
                        llm_level: j.llm_level,
                        votes: j.votes,
                        reason: j.error,
                    });
                }
            }
        }
    }
    state.remove_queries(&dropped.iter().map(|(q, _)| q.clone()).collect());
    Ok(CorrectionOutput {
        candidates: state,
        report,
        dropped,
    })
}

#[derive(Debug, Clone)]
pub struct QcOutput {
    pub bundle: DatasetBundle,
    pub report: Vec<QcRecord>,
    pub dropped: Vec<(String, String)>,
}

/// Filter, correct, split and assemble.
pub fn run_qc(
    seed_corpus: &[Document],
    candidates: &CandidateSets,
    providers: &QcProviders<'_>,
    config: &QcConfig,
    checkpoint: Option<&Checkpoint>,
) -> Result<QcOutput> {
    config.validate()?;
    candidates.validate()?;
    let judge = Judge::new(providers.chat, providers.templates);
    let filtered = filter_low_quality_queries(candidates, &judge, config, checkpoint)?;
    let corrected = correct_labels(&filtered.candidates, seed_corpus, providers, config, checkpoint)?;
    let ids: Vec<String> = corrected.candidates.queries.iter().map(|q| q.id.clone()).collect();
    let split = if ids.is_empty() {
        BTreeMap::new()
    } else {
        split_queries(
            &ids,
            config.task,
            config.dev_fraction,
            config.split_seed,
            config.long_doc_split,
        )?
    };
    let bundle = assemble_dataset(seed_corpus, &corrected.candidates, split)?;
    let mut report = filtered.report;
    report.extend(corrected.report);
    Ok(QcOutput {
        bundle,
        report,
        dropped: corrected.dropped,
    })
}

/// Provider calls a QC run would make at most, for `--dry-run`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QcPlan {
    pub queries: usize,
    pub filter_judge_calls: usize,
    pub corpus_to_embed: usize,
    pub recall_depth: usize,
    pub reranker_calls: usize,
}

pub fn plan_qc(seed_corpus: &[Document], candidates: &CandidateSets, config: &QcConfig, rerankers: usize) -> QcPlan {
    let ids: HashSet<&str> = seed_corpus
        .iter()
        .chain(&candidates.positives)
        .chain(&candidates.hard_negatives)
        .map(|d| d.id.as_str())
        .collect();
    QcPlan {
        queries: candidates.queries.len(),
        filter_judge_calls: candidates.queries.len(),
        corpus_to_embed: ids.len(),
        recall_depth: config.recall_k.min(ids.len()),
        reranker_calls: candidates.queries.len() * rerankers,
    }
}
