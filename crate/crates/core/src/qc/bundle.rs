use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::path::Path;

use crate::corpus::io::{read_corpus, read_qrels, read_queries, write_corpus, write_qrels, write_queries};
use crate::error::{Error, Result};
use crate::generator::CandidateSets;
use crate::types::{ensure_unique_ids, ensure_unique_pairs, Document, Qrel, Query, Split};

pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const QUERIES_FILE: &str = "queries.jsonl";
pub const QRELS_FILE: &str = "qrels.tsv";
pub const SPLIT_FILE: &str = "split.tsv";
pub const SPLIT_HEADER: &str = "query-id\tsplit";

/// The finished test collection.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetBundle {
    pub corpus: Vec<Document>,
    pub queries: Vec<Query>,
    pub qrels: Vec<Qrel>,
    pub split: BTreeMap<String, Split>,
}

impl DatasetBundle {
    pub fn validate(&self) -> Result<()> {
        ensure_unique_ids(self.corpus.iter().map(|d| d.id.as_str()))?;
        ensure_unique_ids(self.queries.iter().map(|q| q.id.as_str()))?;
        ensure_unique_pairs(&self.qrels)?;
        let docs: HashSet<&str> = self.corpus.iter().map(|d| d.id.as_str()).collect();
        let queries: HashSet<&str> = self.queries.iter().map(|q| q.id.as_str()).collect();

        let dangling: Vec<String> = self
            .qrels
            .iter()
            .filter(|r| !queries.contains(r.query_id.as_str()) || !docs.contains(r.doc_id.as_str()))
            .map(|r| format!("({}, {})", r.query_id, r.doc_id))
            .collect();
        if !dangling.is_empty() {
            return Err(Error::integrity(format!("dangling judgments: {}", dangling.join(", "))));
        }
        let with_positive: HashSet<&str> = self
            .qrels
            .iter()
            .filter(|r| r.is_positive())
            .map(|r| r.query_id.as_str())
            .collect();
        let unjudged: Vec<&str> = queries.iter().copied().filter(|q| !with_positive.contains(q)).collect();
        if !unjudged.is_empty() {
            return Err(Error::integrity(format!(
                "queries without a positive: {}",
                unjudged.join(", ")
            )));
        }
        let split_keys: HashSet<&str> = self.split.keys().map(String::as_str).collect();
        if split_keys != queries {
            return Err(Error::integrity(
                "split assignment does not cover exactly the retained queries",
            ));
        }
        Ok(())
    }

    pub fn queries_in(&self, split: Option<Split>) -> impl Iterator<Item = &Query> {
        self.queries
            .iter()
            .filter(move |q| split.is_none_or(|s| self.split.get(&q.id) == Some(&s)))
    }

    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        write_corpus(&self.corpus, dir.join(CORPUS_FILE))?;
        write_queries(&self.queries, dir.join(QUERIES_FILE))?;
        write_qrels(&self.qrels, dir.join(QRELS_FILE))?;
        write_split(&self.split, dir.join(SPLIT_FILE))
    }

    pub fn read(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let bundle = Self {
            corpus: read_corpus(dir.join(CORPUS_FILE))?,
            queries: read_queries(dir.join(QUERIES_FILE))?,
            qrels: read_qrels(dir.join(QRELS_FILE))?,
            split: read_split(dir.join(SPLIT_FILE))?,
        };
        bundle.validate()?;
        Ok(bundle)
    }
}

pub fn write_split(split: &BTreeMap<String, Split>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from(SPLIT_HEADER);
    out.push('\n');
    for (q, s) in split {
        out.push_str(&format!("{q}\t{s}\n"));
    }
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(format!("creating {}", parent.display()), e))?;
    }
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn read_split(path: impl AsRef<Path>) -> Result<BTreeMap<String, Split>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || (i == 0 && line.trim() == SPLIT_HEADER) {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let (q, s) = line
            .split_once('\t')
            .ok_or_else(|| parse_err("expected `query-id<TAB>split`".into()))?;
        let s: Split = s.trim().parse().map_err(|e: Error| parse_err(e.to_string()))?;
        if out.insert(q.to_string(), s).is_some() {
            return Err(Error::integrity(format!(
                "{}:{}: duplicate query `{q}`",
                path.display(),
                i + 1
            )));
        }
    }
    Ok(out)
}

/// Unions the seed corpus with the surviving generated documents (seed
/// documents are not repeated) and gathers every judgment.
pub fn assemble_dataset(
    seed_corpus: &[Document],
    candidates: &CandidateSets,
    split: BTreeMap<String, Split>,
) -> Result<DatasetBundle> {
    let mut seen = HashSet::new();
    let corpus: Vec<Document> = seed_corpus
        .iter()
        .chain(&candidates.positives)
        .chain(&candidates.hard_negatives)
        .filter(|d| seen.insert(d.id.clone()))
        .cloned()
        .collect();
    let bundle = DatasetBundle {
        corpus,
        queries: candidates.queries.clone(),
        qrels: candidates
            .pos_qrels
            .iter()
            .chain(&candidates.neg_qrels)
            .cloned()
            .collect(),
        split,
    };
    bundle.validate()?;
    Ok(bundle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{InfoType, LengthBucket, Provenance, QueryAttributes, QueryType, Style};

    fn query(id: &str, positive: &str) -> Query {
        Query {
            id: id.into(),
            text: format!("text {id}"),
            original_text: format!("text {id}"),
            attributes: QueryAttributes {
                length_bucket: LengthBucket::From5To9,
                query_type: QueryType::Question,
                info_type: InfoType::Overall,
                style: Style::Concise,
            },
            character: "c".into(),
            scenario: "s".into(),
            positive_doc_id: positive.into(),
            rewrite_history: vec![format!("text {id}")],
            provenance: Provenance::default(),
        }
    }

    fn fixture() -> (Vec<Document>, CandidateSets) {
        let seed: Vec<Document> = (0..5)
            .map(|i| Document::new(format!("d{i}"), format!("doc {i}")))
            .collect();
        let cands = CandidateSets {
            queries: vec![query("q-0", "d1"), query("q-1", "d3")],
            positives: vec![seed[1].clone(), seed[3].clone()],
            hard_negatives: vec![],
            pos_qrels: vec![Qrel::new("q-0", "d1", 1), Qrel::new("q-1", "d3", 1)],
            neg_qrels: vec![],
        };
        (seed, cands)
    }

    fn split() -> BTreeMap<String, Split> {
        [("q-0".to_string(), Split::Dev), ("q-1".to_string(), Split::Test)].into()
    }

    #[test]
    fn union_without_duplicates() {
        let (seed, cands) = fixture();
        let b = assemble_dataset(&seed, &cands, split()).unwrap();
        assert_eq!(b.corpus.len(), 5);
        assert_eq!(b.queries_in(Some(Split::Dev)).count(), 1);
        assert_eq!(b.queries_in(None).count(), 2);
    }

    #[test]
    fn round_trip() {
        let (seed, cands) = fixture();
        let b = assemble_dataset(&seed, &cands, split()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        b.write(dir.path()).unwrap();
        assert_eq!(DatasetBundle::read(dir.path()).unwrap(), b);
        let split_text = std::fs::read_to_string(dir.path().join(SPLIT_FILE)).unwrap();
        assert_eq!(split_text, "query-id\tsplit\nq-0\tdev\nq-1\ttest\n");
    }

    #[test]
    fn invariants_are_enforced() {
        let (seed, mut cands) = fixture();
        cands.pos_qrels.push(Qrel::new("q-0", "missing", 1));
        let err = assemble_dataset(&seed, &cands, split()).unwrap_err();
        assert!(err.to_string().contains("(q-0, missing)"));

        let (seed, cands) = fixture();
        let mut partial = split();
        partial.remove("q-1");
        assert!(assemble_dataset(&seed, &cands, partial).is_err());
    }
}
