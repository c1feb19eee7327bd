//! Candidate generation: attribute sampling, the prompt chain from a
//! positive document to a rewritten query, and hard-negative synthesis.

mod attributes;
pub mod candidates;
mod config;
pub mod parse;
mod pipeline;
mod steps;
pub mod templates;

pub use attributes::{sample_attributes, sample_hard_negative_count, AttributeSampler};
pub use candidates::CandidateSets;
pub use config::GenerationConfig;
pub use pipeline::{
    iteration_rng, plan_generation, query_id, run_generation_loop, run_generation_loop_with, GenerationOutput,
    PlannedIteration, SkippedIteration,
};
pub use steps::{
    generate_characters, generate_hard_negatives, generate_query, generate_scenario, request_hard_negatives,
    rewrite_query, GenContext, HardNegatives, RewriteOutcome,
};
pub use templates::{Template, TemplateSet, TEMPLATE_NAMES};
