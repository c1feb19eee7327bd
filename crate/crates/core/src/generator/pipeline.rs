//! The seeded generation loop.
//!
//! Iteration `i` draws all of its randomness from ChaCha stream `i + 1` of
//! the configured seed, and the positive-document permutation comes from
//! stream 0. Results are gathered by iteration index, so the output does not
//! depend on how many workers ran the loop.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::attributes::{sample_hard_negative_count, AttributeSampler};
use super::candidates::CandidateSets;
use super::config::GenerationConfig;
use super::steps::{
    generate_characters, generate_query, generate_scenario, request_hard_negatives, rewrite_query, GenContext,
};
use super::templates::TemplateSet;
use crate::error::{Error, Result};
use crate::providers::{ChatParams, ChatProvider};
use crate::tokenize::WordPunctTokenizer;
use crate::types::{Document, Provenance, Qrel, Query, QueryAttributes};

pub fn query_id(iteration: usize) -> String {
    format!("q-{iteration}")
}

pub fn iteration_rng(seed: u64, iteration: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(iteration as u64 + 1);
    rng
}

/// What an iteration will do before any prompt is sent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedIteration {
    pub iteration: usize,
    pub query_id: String,
    pub positive_doc_id: String,
    pub attributes: QueryAttributes,
    pub hard_negative_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedIteration {
    pub iteration: usize,
    pub positive_doc_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct GenerationOutput {
    pub candidates: CandidateSets,
    pub skipped: Vec<SkippedIteration>,
}

struct Planner<'c> {
    corpus: &'c [Document],
    order: Vec<usize>,
    sampler: AttributeSampler,
    config: GenerationConfig,
}

impl<'c> Planner<'c> {
    fn new(corpus: &'c [Document], config: &GenerationConfig) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::config("generation needs a non-empty corpus"));
        }
        let sampler = AttributeSampler::new(config)?;
        let mut order: Vec<usize> = (0..corpus.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(config.rng_seed));
        Ok(Self {
            corpus,
            order,
            sampler,
            config: config.clone(),
        })
    }

    /// Positives are drawn without replacement until the corpus runs out,
    /// then with replacement.
    fn plan(&self, iteration: usize, rng: &mut ChaCha8Rng) -> (&'c Document, PlannedIteration) {
        let idx = match self.order.get(iteration) {
            Some(&i) => i,
            None => rng.gen_range(0..self.corpus.len()),
        };
        let positive = &self.corpus[idx];
        let attributes = self.sampler.sample(rng);
        let hard_negative_count = sample_hard_negative_count(&self.config, rng);
        let plan = PlannedIteration {
            iteration,
            query_id: query_id(iteration),
            positive_doc_id: positive.id.clone(),
            attributes,
            hard_negative_count,
        };
        (positive, plan)
    }
}

/// Plans every iteration without contacting a provider.
pub fn plan_generation(corpus: &[Document], config: &GenerationConfig) -> Result<Vec<PlannedIteration>> {
    let planner = Planner::new(corpus, config)?;
    Ok((0..config.n_queries)
        .map(|i| planner.plan(i, &mut iteration_rng(config.rng_seed, i)).1)
        .collect())
}

struct IterationResult {
    query: Query,
    positive: Document,
    hard_negatives: Vec<Document>,
}

fn run_iteration(
    planner: &Planner<'_>,
    iteration: usize,
    ctx: &GenContext<'_>,
) -> std::result::Result<IterationResult, SkippedIteration> {
    let config = &planner.config;
    let mut rng = iteration_rng(config.rng_seed, iteration);
    let (positive, plan) = planner.plan(iteration, &mut rng);
    let skip = |e: Error| {
        tracing::warn!(iteration, positive = %positive.id, error = %e, "skipping iteration");
        SkippedIteration {
            iteration,
            positive_doc_id: positive.id.clone(),
            reason: e.to_string(),
        }
    };

    let characters = generate_characters(positive, ctx).map_err(skip)?;
    let character = characters[rng.gen_range(0..characters.len())].clone();
    let scenario = generate_scenario(positive, &character, ctx).map_err(skip)?;
    let original = generate_query(positive, &character, &scenario, &plan.attributes, config.task, ctx).map_err(skip)?;
    let rewrite = rewrite_query(
        &original,
        positive,
        plan.attributes.style,
        config.rewrite_max_iters,
        config.rewrite_overlap_threshold,
        ctx,
    )
    .map_err(skip)?;
    let negatives =
        request_hard_negatives(&plan.query_id, &rewrite.text, positive, plan.hard_negative_count, ctx).map_err(skip)?;

    let query = Query {
        id: plan.query_id,
        text: rewrite.text,
        original_text: original,
        attributes: plan.attributes,
        character,
        scenario,
        positive_doc_id: positive.id.clone(),
        rewrite_history: rewrite.history,
        provenance: Provenance {
            iteration,
            seed: config.rng_seed,
            template_version: ctx.templates.version.clone(),
            rewrite_fell_back: rewrite.fell_back,
            hard_negative_shortfall: negatives.shortfall(),
        },
    };
    Ok(IterationResult {
        query,
        positive: positive.clone(),
        hard_negatives: negatives.docs,
    })
}

/// Runs `config.n_queries` iterations on a pool of `config.workers` threads.
/// Failed iterations are logged and reported in `skipped`.
pub fn run_generation_loop_with(
    corpus: &[Document],
    config: &GenerationConfig,
    ctx: &GenContext<'_>,
) -> Result<GenerationOutput> {
    let planner = Planner::new(corpus, config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<_> = pool.install(|| {
        (0..config.n_queries)
            .into_par_iter()
            .map(|i| run_iteration(&planner, i, ctx))
            .collect()
    });

    let mut out = GenerationOutput::default();
    let mut seen_positives = HashSet::new();
    for r in results {
        match r {
            Ok(r) => {
                let c = &mut out.candidates;
                c.pos_qrels.push(Qrel::new(&r.query.id, &r.positive.id, 1));
                for d in &r.hard_negatives {
                    c.neg_qrels.push(Qrel::new(&r.query.id, &d.id, 0));
                }
                if seen_positives.insert(r.positive.id.clone()) {
                    c.positives.push(r.positive);
                }
                c.hard_negatives.extend(r.hard_negatives);
                c.queries.push(r.query);
            }
            Err(s) => out.skipped.push(s),
        }
    }
    tracing::info!(
        queries = out.candidates.queries.len(),
        skipped = out.skipped.len(),
        hard_negatives = out.candidates.hard_negatives.len(),
        "generation finished"
    );
    Ok(out)
}

/// [`run_generation_loop_with`] using the built-in templates and the default
/// tokenizer.
pub fn run_generation_loop(
    corpus: &[Document],
    config: &GenerationConfig,
    chat: &dyn ChatProvider,
) -> Result<GenerationOutput> {
    let templates = TemplateSet::builtin();
    let ctx = GenContext {
        chat,
        templates: &templates,
        tokenizer: &WordPunctTokenizer,
        params: ChatParams::GENERATION,
    };
    run_generation_loop_with(corpus, config, &ctx)
}
