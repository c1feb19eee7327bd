//! The whole pipeline offline: prepare a corpus, generate candidates, run
//! quality control, write the dataset, then evaluate BM25 on it.
//!
//! `cargo run --example end_to_end [OUT_DIR]`

use irbench::corpus::{filter_documents, TokenBounds};
use irbench::eval::{bm25_build, evaluate_run, write_run};
use irbench::generator::{run_generation_loop, GenerationConfig, TemplateSet};
use irbench::providers::mock::{HashEmbedder, TokenOverlapReranker};
use irbench::providers::simulated::SimulatedChat;
use irbench::providers::Reranker;
use irbench::qc::{run_qc, QcConfig, QcProviders};
use irbench::synthetic::synthetic_corpus;
use irbench::tokenize::WordPunctTokenizer;
use irbench::types::{Split, Task};

fn main() -> irbench::Result<()> {
    let out_dir = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("irbench-end-to-end"));
    let tokenizer = WordPunctTokenizer;

    let corpus: Vec<_> = filter_documents(synthetic_corpus(300, 21), TokenBounds::default(), &tokenizer)?.collect();
    let gen_cfg = GenerationConfig {
        n_queries: 40,
        ..Default::default()
    };
    let gen = run_generation_loop(&corpus, &gen_cfg, &SimulatedChat)?;
    println!("generated {} queries", gen.candidates.queries.len());

    let templates = TemplateSet::builtin();
    let rerankers: Vec<_> = (0..3)
        .map(|i| TokenOverlapReranker::new(format!("r{i}")).with_jitter(0.05))
        .collect();
    let providers = QcProviders {
        chat: &SimulatedChat,
        embedder: &HashEmbedder::default(),
        rerankers: rerankers.iter().map(|r| r as &dyn Reranker).collect(),
        templates: &templates,
    };
    let qc = run_qc(&corpus, &gen.candidates, &providers, &QcConfig::default(), None)?;
    let bundle = qc.bundle;
    bundle.write(&out_dir)?;
    println!("kept {} queries, wrote {}", bundle.queries.len(), out_dir.display());

    let index = bm25_build(&bundle.corpus, &tokenizer)?;
    let runs: Vec<_> = bundle
        .queries
        .iter()
        .map(|q| index.search(&q.id, &q.text, &tokenizer, 100))
        .collect();
    write_run(&runs, "bm25", out_dir.join("bm25.run"))?;
    for split in [Some(Split::Dev), Some(Split::Test), None] {
        let r = evaluate_run(&runs, &bundle, Task::Qa, split);
        let name = split.map_or("all".to_string(), |s| s.to_string());
        println!(
            "{name:>4} {} = {:.4} ({} queries)",
            r.label(),
            r.mean,
            r.per_query.len()
        );
    }
    Ok(())
}
