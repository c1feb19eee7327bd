//! Domain types shared across the pipeline stages.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where a corpus entry came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    #[default]
    SeedCorpus,
    HardNegative,
    LongDocChunk,
}

pub const META_PARENT_ID: &str = "parent_id";
pub const META_CHUNK_INDEX: &str = "chunk_index";
pub const META_QUERY_ID: &str = "query_id";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub title: String,
    pub text: String,
    pub origin: Origin,
    pub source_meta: BTreeMap<String, String>,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            title: String::new(),
            text: text.into(),
            origin: Origin::SeedCorpus,
            source_meta: BTreeMap::new(),
        }
    }

    pub fn with_title(mut self, title: impl Into<String>) -> Self {
        self.title = title.into();
        self
    }

    pub fn with_origin(mut self, origin: Origin) -> Self {
        self.origin = origin;
        self
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.source_meta.insert(key.into(), value.into());
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::integrity("document with empty id"));
        }
        if self.text.trim().is_empty() {
            return Err(Error::integrity(format!("document `{}` has empty text", self.id)));
        }
        if self.origin == Origin::LongDocChunk
            && !(self.source_meta.contains_key(META_PARENT_ID) && self.source_meta.contains_key(META_CHUNK_INDEX))
        {
            return Err(Error::integrity(format!(
                "chunk `{}` lacks parent id or chunk index",
                self.id
            )));
        }
        Ok(())
    }
}

/// Fails on the first repeated document id.
pub fn ensure_unique_ids<'a>(ids: impl IntoIterator<Item = &'a str>) -> Result<()> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::integrity(format!("duplicate id `{id}`")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    #[serde(alias = "QA")]
    Qa,
    #[serde(rename = "long_doc", alias = "longdoc", alias = "LongDoc")]
    LongDoc,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Qa => "qa",
            Task::LongDoc => "long_doc",
        })
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "qa" => Ok(Task::Qa),
            "long_doc" | "longdoc" => Ok(Task::LongDoc),
            _ => Err(Error::config(format!("unknown task `{s}` (expected qa or long_doc)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LengthBucket {
    Under5,
    From5To9,
    From10To20,
    Over20,
}

impl LengthBucket {
    pub const ALL: [LengthBucket; 4] = [
        LengthBucket::Under5,
        LengthBucket::From5To9,
        LengthBucket::From10To20,
        LengthBucket::Over20,
    ];

    /// Instruction phrase slotted into the query prompt.
    pub fn phrase(self) -> &'static str {
        match self {
            LengthBucket::Under5 => "less than 5 words",
            LengthBucket::From5To9 => "less than 10 words",
            LengthBucket::From10To20 => "10 to 20 words",
            LengthBucket::Over20 => "at least 20 words",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QueryType {
    Question,
    Problem,
    Claim,
}

impl QueryType {
    pub const ALL: [QueryType; 3] = [QueryType::Question, QueryType::Problem, QueryType::Claim];

    pub fn phrase(self) -> &'static str {
        match self {
            QueryType::Question => "question",
            QueryType::Problem => "problem",
            QueryType::Claim => "claim",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InfoType {
    Overall,
    Partial,
}

impl InfoType {
    pub const ALL: [InfoType; 2] = [InfoType::Overall, InfoType::Partial];

    pub fn phrase(self) -> &'static str {
        match self {
            InfoType::Overall => "the overall information in the document",
            InfoType::Partial => "partial information beyond the main topic of the document",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Style {
    Concise,
    Casual,
    Informal,
    Formal,
    Professional,
    Complicated,
    Academic,
}

impl Style {
    pub const ALL: [Style; 7] = [
        Style::Concise,
        Style::Casual,
        Style::Informal,
        Style::Formal,
        Style::Professional,
        Style::Complicated,
        Style::Academic,
    ];

    pub fn phrase(self) -> &'static str {
        match self {
            Style::Concise => "concise",
            Style::Casual => "casual",
            Style::Informal => "informal",
            Style::Formal => "formal",
            Style::Professional => "professional",
            Style::Complicated => "complicated",
            Style::Academic => "academic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QueryAttributes {
    pub length_bucket: LengthBucket,
    pub query_type: QueryType,
    pub info_type: InfoType,
    pub style: Style,
}

impl QueryAttributes {
    pub fn validate_for(&self, task: Task) -> Result<()> {
        if self.query_type == QueryType::Claim
            && matches!(self.length_bucket, LengthBucket::Under5 | LengthBucket::From5To9)
        {
            return Err(Error::Precondition(format!(
                "claim queries must be at least 10 words, got `{}`",
                self.length_bucket.phrase()
            )));
        }
        if task == Task::LongDoc && self.query_type == QueryType::Problem {
            return Err(Error::Precondition(
                "long-document queries are questions or claims only".into(),
            ));
        }
        Ok(())
    }
}

/// Bookkeeping attached to each generated query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Provenance {
    pub iteration: usize,
    pub seed: u64,
    pub template_version: String,
    #[serde(default)]
    pub rewrite_fell_back: bool,
    #[serde(default)]
    pub hard_negative_shortfall: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub id: String,
    pub text: String,
    pub original_text: String,
    pub attributes: QueryAttributes,
    pub character: String,
    pub scenario: String,
    pub positive_doc_id: String,
    pub rewrite_history: Vec<String>,
    pub provenance: Provenance,
}

impl Query {
    pub fn validate(&self) -> Result<()> {
        if self.text.trim().is_empty() {
            return Err(Error::integrity(format!("query `{}` has empty text", self.id)));
        }
        match (self.rewrite_history.first(), self.rewrite_history.last()) {
            (Some(first), Some(last)) if *first == self.original_text && *last == self.text => Ok(()),
            _ => Err(Error::integrity(format!(
                "query `{}` rewrite history must start at the original text and end at the final text",
                self.id
            ))),
        }
    }
}

/// A binary relevance judgment.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Qrel {
    pub query_id: String,
    pub doc_id: String,
    pub relevance: u8,
}

impl Qrel {
    pub fn new(query_id: impl Into<String>, doc_id: impl Into<String>, relevance: u8) -> Self {
        Self {
            query_id: query_id.into(),
            doc_id: doc_id.into(),
            relevance,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.relevance > 0
    }
}

/// Fails on a repeated (query, document) pair.
pub fn ensure_unique_pairs<'a>(qrels: impl IntoIterator<Item = &'a Qrel>) -> Result<()> {
    let mut seen = HashSet::new();
    for q in qrels {
        if !seen.insert((q.query_id.as_str(), q.doc_id.as_str())) {
            return Err(Error::integrity(format!(
                "duplicate judgment for ({}, {})",
                q.query_id, q.doc_id
            )));
        }
    }
    Ok(())
}

/// Ranked retrieval output for one query: unique documents, scores
/// non-increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub query_id: String,
    pub entries: Vec<(String, f64)>,
}

impl RankedList {
    /// Sorts by descending score, breaking ties by ascending doc id, and
    /// keeps the first (best) occurrence of any repeated doc id.
    pub fn from_scores(query_id: impl Into<String>, mut scored: Vec<(String, f64)>) -> Self {
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let mut seen = HashSet::new();
        scored.retain(|(id, _)| seen.insert(id.clone()));
        Self {
            query_id: query_id.into(),
            entries: scored,
        }
    }

    pub fn empty(query_id: impl Into<String>) -> Self {
        Self {
            query_id: query_id.into(),
            entries: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(id, _)| id.as_str())
    }

    pub fn truncate(&mut self, k: usize) {
        self.entries.truncate(k);
    }

    pub fn validate(&self) -> Result<()> {
        ensure_unique_ids(self.doc_ids())?;
        if self.entries.windows(2).any(|w| w[0].1 < w[1].1) {
            return Err(Error::integrity(format!(
                "ranked list for `{}` has increasing scores",
                self.query_id
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Dev,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Dev => "dev",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            _ => Err(Error::config(format!("unknown split `{s}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranked_list_orders_ties_by_doc_id() {
        let list = RankedList::from_scores(
            "q",
            vec![
                ("b".into(), 1.0),
                ("a".into(), 1.0),
                ("c".into(), 2.0),
                ("a".into(), 0.5),
            ],
        );
        assert_eq!(list.doc_ids().collect::<Vec<_>>(), vec!["c", "a", "b"]);
        list.validate().unwrap();
    }

    #[test]
    fn claim_must_not_be_short() {
        let attrs = QueryAttributes {
            length_bucket: LengthBucket::Under5,
            query_type: QueryType::Claim,
            info_type: InfoType::Overall,
            style: Style::Concise,
        };
        assert!(matches!(attrs.validate_for(Task::Qa), Err(Error::Precondition(_))));
    }

    #[test]
    fn chunk_documents_need_parent_metadata() {
        let d = Document::new("x-chunk-0", "text").with_origin(Origin::LongDocChunk);
        assert!(d.validate().is_err());
        let d = d.with_meta(META_PARENT_ID, "x").with_meta(META_CHUNK_INDEX, "0");
        d.validate().unwrap();
    }

    #[test]
    fn blank_text_is_invalid() {
        assert!(Document::new("a", "  \n").validate().is_err());
    }

    #[test]
    fn task_parses_common_spellings() {
        assert_eq!("QA".parse::<Task>().unwrap(), Task::Qa);
        assert_eq!("long-doc".parse::<Task>().unwrap(), Task::LongDoc);
        assert!("web".parse::<Task>().is_err());
    }
}
