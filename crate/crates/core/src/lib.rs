//! Build synthetic information-retrieval test collections from raw text with
//! an LLM in the loop, and evaluate retrievers on them.
//!
//! The pipeline runs in three stages: [`corpus`] prepares documents,
//! [`generator`] writes queries and hard negatives, and [`qc`] filters
//! queries, fixes false labels and assembles the final bundle. [`eval`]
//! scores runs and carries the consistency and diversity analyses.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod generator;
pub mod providers;
pub mod qc;
pub mod synthetic;
pub mod tokenize;
pub mod types;

pub use error::{Error, ProviderError, Result};
