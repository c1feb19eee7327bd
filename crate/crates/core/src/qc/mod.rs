//! Quality control: drop queries whose positive the judge rejects, repair
//! false labels through recall, reranker voting and judging, then split
//! and assemble the final bundle.

mod actions;
mod bundle;
mod checkpoint;
mod judge;
mod pipeline;
mod prelabel;
mod recall;
mod split;

pub use actions::{action_for, apply_action_matrix, classify, Action, ActionOutcome, DocClass};
pub use bundle::{
    assemble_dataset, read_split, write_split, DatasetBundle, CORPUS_FILE, QRELS_FILE, QUERIES_FILE, SPLIT_FILE,
};
pub use checkpoint::Checkpoint;
pub use judge::{judge_relevance, parse_lenient, parse_strict, Judge, RelevanceLevel};
pub use pipeline::{
    correct_labels, filter_low_quality_queries, plan_qc, run_qc, CorrectionOutput, FilterOutput, QcConfig, QcOutput,
    QcPlan, QcProviders, QcRecord, ReportAction,
};
pub use prelabel::{prelabel, PreLabel, RerankerVote, Thresholds};
pub use recall::{recall_top_k, EmbeddingIndex, DEFAULT_RECALL_K};
pub use split::{split_queries, DEFAULT_DEV_FRACTION};
