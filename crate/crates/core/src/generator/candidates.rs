use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::Path;

use crate::corpus::io::{read_corpus, read_qrels, read_queries, write_corpus, write_qrels, write_queries};
use crate::error::{Error, Result};
use crate::types::{ensure_unique_ids, ensure_unique_pairs, Document, Qrel, Query, META_QUERY_ID};

pub const QUERIES_FILE: &str = "queries.jsonl";
pub const POSITIVES_FILE: &str = "positives.jsonl";
pub const HARD_NEGATIVES_FILE: &str = "hard_negatives.jsonl";
pub const QRELS_FILE: &str = "qrels.tsv";

/// Queries with their positive documents, generated hard negatives, and the
/// positive and negative judgments linking them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CandidateSets {
    pub queries: Vec<Query>,
    pub positives: Vec<Document>,
    pub hard_negatives: Vec<Document>,
    pub pos_qrels: Vec<Qrel>,
    pub neg_qrels: Vec<Qrel>,
}

impl CandidateSets {
    pub fn query(&self, id: &str) -> Option<&Query> {
        self.queries.iter().find(|q| q.id == id)
    }

    /// Positives and hard negatives keyed by id.
    pub fn documents(&self) -> HashMap<&str, &Document> {
        self.positives
            .iter()
            .chain(&self.hard_negatives)
            .map(|d| (d.id.as_str(), d))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        ensure_unique_ids(self.queries.iter().map(|q| q.id.as_str()))?;
        ensure_unique_ids(self.positives.iter().chain(&self.hard_negatives).map(|d| d.id.as_str()))?;
        ensure_unique_pairs(self.pos_qrels.iter().chain(&self.neg_qrels))?;
        for q in &self.queries {
            q.validate()?;
        }
        for d in self.positives.iter().chain(&self.hard_negatives) {
            d.validate()?;
        }
        if let Some(r) = self.pos_qrels.iter().find(|r| r.relevance != 1) {
            return Err(Error::integrity(format!(
                "positive judgment ({}, {}) is not 1",
                r.query_id, r.doc_id
            )));
        }
        if let Some(r) = self.neg_qrels.iter().find(|r| r.relevance != 0) {
            return Err(Error::integrity(format!(
                "negative judgment ({}, {}) is not 0",
                r.query_id, r.doc_id
            )));
        }

        let queries: HashSet<&str> = self.queries.iter().map(|q| q.id.as_str()).collect();
        let docs = self.documents();
        let dangling: Vec<String> = self
            .pos_qrels
            .iter()
            .chain(&self.neg_qrels)
            .filter(|r| !queries.contains(r.query_id.as_str()) || !docs.contains_key(r.doc_id.as_str()))
            .map(|r| format!("({}, {})", r.query_id, r.doc_id))
            .collect();
        if !dangling.is_empty() {
            return Err(Error::integrity(format!("dangling judgments: {}", dangling.join(", "))));
        }

        let pos: HashSet<(&str, &str)> = self
            .pos_qrels
            .iter()
            .map(|r| (r.query_id.as_str(), r.doc_id.as_str()))
            .collect();
        for q in &self.queries {
            if !pos.contains(&(q.id.as_str(), q.positive_doc_id.as_str())) {
                return Err(Error::integrity(format!(
                    "query `{}` lacks a positive judgment for `{}`",
                    q.id, q.positive_doc_id
                )));
            }
        }
        let neg: HashSet<(&str, &str)> = self
            .neg_qrels
            .iter()
            .map(|r| (r.query_id.as_str(), r.doc_id.as_str()))
            .collect();
        for d in &self.hard_negatives {
            let owner = d.source_meta.get(META_QUERY_ID).map(String::as_str).unwrap_or_default();
            if !neg.contains(&(owner, d.id.as_str())) {
                return Err(Error::integrity(format!(
                    "hard negative `{}` lacks a negative judgment for its query `{owner}`",
                    d.id
                )));
            }
        }
        Ok(())
    }

    /// Drops the given queries, every judgment about them, and the hard
    /// negatives they generated. Positives no longer referenced by any
    /// judgment are dropped too.
    pub fn remove_queries(&mut self, ids: &HashSet<String>) {
        if ids.is_empty() {
            return;
        }
        self.queries.retain(|q| !ids.contains(&q.id));
        self.pos_qrels.retain(|r| !ids.contains(&r.query_id));
        self.neg_qrels.retain(|r| !ids.contains(&r.query_id));
        self.hard_negatives
            .retain(|d| d.source_meta.get(META_QUERY_ID).is_none_or(|q| !ids.contains(q)));
        let referenced: HashSet<&str> = self.pos_qrels.iter().map(|r| r.doc_id.as_str()).collect();
        self.positives.retain(|d| referenced.contains(d.id.as_str()));
    }

    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        write_queries(&self.queries, dir.join(QUERIES_FILE))?;
        write_corpus(&self.positives, dir.join(POSITIVES_FILE))?;
        write_corpus(&self.hard_negatives, dir.join(HARD_NEGATIVES_FILE))?;
        let mut qrels: Vec<&Qrel> = self.pos_qrels.iter().chain(&self.neg_qrels).collect();
        let order: HashMap<&str, usize> = self
            .queries
            .iter()
            .enumerate()
            .map(|(i, q)| (q.id.as_str(), i))
            .collect();
        qrels.sort_by_key(|r| (order.get(r.query_id.as_str()).copied(), std::cmp::Reverse(r.relevance)));
        write_qrels(qrels, dir.join(QRELS_FILE))
    }

    pub fn read(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let (pos_qrels, neg_qrels) = read_qrels(dir.join(QRELS_FILE))?
            .into_iter()
            .partition(Qrel::is_positive);
        let sets = Self {
            queries: read_queries(dir.join(QUERIES_FILE))?,
            positives: read_corpus(dir.join(POSITIVES_FILE))?,
            hard_negatives: read_corpus(dir.join(HARD_NEGATIVES_FILE))?,
            pos_qrels,
            neg_qrels,
        };
        sets.validate()?;
        Ok(sets)
    }

    /// Ids of all hard negatives, for threshold selection during QC.
    pub fn hard_negative_ids(&self) -> BTreeSet<String> {
        self.hard_negatives.iter().map(|d| d.id.clone()).collect()
    }
}
