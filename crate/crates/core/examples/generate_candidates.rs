//! Generates candidate queries, positives and hard negatives with the
//! offline simulated model, then prints a few of them.

use irbench::generator::{plan_generation, run_generation_loop, GenerationConfig};
use irbench::providers::simulated::SimulatedChat;
use irbench::synthetic::synthetic_corpus;

fn main() -> irbench::Result<()> {
    let corpus = synthetic_corpus(100, 1);
    let cfg = GenerationConfig {
        n_queries: 10,
        rng_seed: 3,
        ..Default::default()
    };
    let plan = plan_generation(&corpus, &cfg)?;
    println!("planned {} iterations; first: {:?}", plan.len(), plan[0]);

    let out = run_generation_loop(&corpus, &cfg, &SimulatedChat)?;
    let c = &out.candidates;
    println!(
        "{} queries, {} positives, {} hard negatives, {} skipped",
        c.queries.len(),
        c.positives.len(),
        c.hard_negatives.len(),
        out.skipped.len()
    );
    for q in c.queries.iter().take(3) {
        println!("\n{} ({:?})", q.id, q.attributes);
        println!("  scenario: {}", q.scenario);
        for (i, text) in q.rewrite_history.iter().enumerate() {
            println!("  v{i}: {text}");
        }
    }
    Ok(())
}
