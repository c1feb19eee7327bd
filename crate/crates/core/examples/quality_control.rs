//! Runs the quality-control stage over generated candidates and tallies
//! what it changed.

use std::collections::BTreeMap;

use irbench::generator::{run_generation_loop, GenerationConfig, TemplateSet};
use irbench::providers::mock::{HashEmbedder, TokenOverlapReranker};
use irbench::providers::simulated::SimulatedChat;
use irbench::providers::Reranker;
use irbench::qc::{run_qc, QcConfig, QcProviders};
use irbench::synthetic::synthetic_corpus;
use irbench::types::Split;

fn main() -> irbench::Result<()> {
    let corpus = synthetic_corpus(150, 2);
    let cfg = GenerationConfig {
        n_queries: 20,
        ..Default::default()
    };
    let gen = run_generation_loop(&corpus, &cfg, &SimulatedChat)?;

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
    let out = run_qc(&corpus, &gen.candidates, &providers, &QcConfig::default(), None)?;

    let mut tally: BTreeMap<String, usize> = BTreeMap::new();
    for r in &out.report {
        *tally.entry(format!("{:?}", r.action)).or_default() += 1;
    }
    println!("actions: {tally:?}");
    for (q, why) in &out.dropped {
        println!("dropped {q}: {why}");
    }
    let b = &out.bundle;
    let dev = b.split.values().filter(|s| **s == Split::Dev).count();
    println!(
        "bundle: {} documents, {} queries ({dev} dev), {} qrels",
        b.corpus.len(),
        b.queries.len(),
        b.qrels.len()
    );
    Ok(())
}
