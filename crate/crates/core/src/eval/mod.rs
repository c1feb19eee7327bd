//! Retrieval metrics, a BM25 baseline, reranking, and the ranking,
//! resampling, similarity, and diversity analyses.

mod bm25;
mod diversity;
mod metrics;
mod rerank;
pub mod run;
mod similarity;
mod stats;

pub use bm25::{bm25_build, bm25_search, Bm25Index, DEFAULT_B, DEFAULT_K1};
pub use diversity::{
    label_query_diversity, parse_label, DiversityOutput, Facet, FALLBACK_LABEL, STYLE_LABELS, TYPE_LABELS,
};
pub use metrics::{evaluate_qrels, evaluate_run, ndcg_at_k, recall_at_k, Metric, MetricReport, DEFAULT_K};
pub use rerank::{rerank_eval, RerankOutput, DEFAULT_RERANK_DEPTH};
pub use run::{format_run, parse_run, read_run, write_run};
pub use similarity::{similarity_matrix, term_distribution, weighted_jaccard, weighted_jaccard_of};
pub use stats::{
    consistency_analysis, rank_by_score, robustness_resample, spearman, spearman_permutation, ConsistencyReport,
    RobustnessReport, SpearmanResult, DEFAULT_PERMUTATIONS, DEFAULT_SAMPLE_SIZE, DEFAULT_TRIALS,
};

use crate::error::{Error, Result};

pub(crate) fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))
}
