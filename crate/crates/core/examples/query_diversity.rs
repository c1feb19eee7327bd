//! Labels generated queries by type and by style and prints each
//! distribution.

use irbench::eval::{label_query_diversity, Facet};
use irbench::generator::{run_generation_loop, GenerationConfig, TemplateSet};
use irbench::providers::simulated::SimulatedChat;
use irbench::synthetic::synthetic_corpus;

fn main() -> irbench::Result<()> {
    let corpus = synthetic_corpus(200, 4);
    let cfg = GenerationConfig {
        n_queries: 60,
        ..Default::default()
    };
    let queries = run_generation_loop(&corpus, &cfg, &SimulatedChat)?.candidates.queries;
    let templates = TemplateSet::builtin();
    for facet in [Facet::Type, Facet::Style] {
        let out = label_query_diversity(&queries, &SimulatedChat, &templates, facet, 4)?;
        println!("{facet}:");
        for (label, n, share) in out.distribution() {
            if n > 0 {
                println!("  {label:<12} {n:>3} {:>5.1}%", share * 100.0);
            }
        }
    }
    Ok(())
}
