//! Corpus preparation: length filtering for the QA task, token-window
//! chunking for the long-document task, and the line-delimited file formats
//! shared by every stage.

mod chunk;
mod filter;
pub mod io;
mod stats;

pub use chunk::{chunk_long_document, chunk_windows, ChunkConfig};
pub use filter::{filter_documents, NoopRedactor, Redactor, TokenBounds};
pub use io::{read_corpus, read_qrels, read_queries, read_query_texts, write_corpus, write_qrels, write_queries};
pub use stats::{corpus_stats, CorpusStats};
