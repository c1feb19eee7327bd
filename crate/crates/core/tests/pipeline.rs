use std::collections::HashMap;

use irbench::generator::{run_generation_loop, GenerationConfig, TemplateSet};
use irbench::providers::mock::{HashEmbedder, TokenOverlapReranker};
use irbench::providers::simulated::SimulatedChat;
use irbench::providers::Reranker;
use irbench::qc::{run_qc, QcConfig, QcProviders, ReportAction};
use irbench::synthetic::synthetic_corpus;

#[test]
fn simulated_pipeline_exercises_every_qc_path() {
    let corpus = synthetic_corpus(200, 7);
    let cfg = GenerationConfig {
        n_queries: 60,
        ..Default::default()
    };
    let gen = run_generation_loop(&corpus, &cfg, &SimulatedChat).unwrap();
    assert!(gen.skipped.is_empty(), "{:?}", gen.skipped);
    let templates = TemplateSet::builtin();
    let r1 = TokenOverlapReranker::new("r1").with_jitter(0.05);
    let r2 = TokenOverlapReranker::new("r2").with_jitter(0.05);
    let r3 = TokenOverlapReranker::new("r3").with_jitter(0.05);
    let providers = QcProviders {
        chat: &SimulatedChat,
        embedder: &HashEmbedder::default(),
        rerankers: vec![&r1 as &dyn Reranker, &r2, &r3],
        templates: &templates,
    };
    let out = run_qc(&corpus, &gen.candidates, &providers, &QcConfig::default(), None).unwrap();
    let mut tally: HashMap<ReportAction, usize> = HashMap::new();
    for r in &out.report {
        *tally.entry(r.action).or_default() += 1;
    }
    for a in [
        ReportAction::DropQuery,
        ReportAction::DiscardHardNegative,
        ReportAction::AddPositive,
    ] {
        assert!(
            tally.get(&a).copied().unwrap_or(0) > 0,
            "{a:?} never happened: {tally:?}"
        );
    }
    out.bundle.validate().unwrap();
}
