//! Line-delimited corpus, query, and qrels files.
//!
//! Corpus and query files hold one JSON object per line (`_id`, `title`,
//! `text` for documents; `_id`, `text`, `metadata` for queries). Qrels are
//! tab-separated with a `query-id\tcorpus-id\tscore` header.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{ensure_unique_pairs, Document, Origin, Provenance, Qrel, Query, QueryAttributes};

pub const QRELS_HEADER: &str = "query-id\tcorpus-id\tscore";

#[derive(Serialize, Deserialize)]
struct CorpusRecord {
    #[serde(rename = "_id")]
    id: String,
    #[serde(default)]
    title: String,
    text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metadata: Option<DocMeta>,
}

#[derive(Serialize, Deserialize)]
struct DocMeta {
    origin: Origin,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    source_meta: BTreeMap<String, String>,
}

impl From<&Document> for CorpusRecord {
    fn from(d: &Document) -> Self {
        let metadata = (d.origin != Origin::SeedCorpus || !d.source_meta.is_empty()).then(|| DocMeta {
            origin: d.origin,
            source_meta: d.source_meta.clone(),
        });
        Self {
            id: d.id.clone(),
            title: d.title.clone(),
            text: d.text.clone(),
            metadata,
        }
    }
}

impl From<CorpusRecord> for Document {
    fn from(r: CorpusRecord) -> Self {
        let (origin, source_meta) = r.metadata.map(|m| (m.origin, m.source_meta)).unwrap_or_default();
        Document {
            id: r.id,
            title: r.title,
            text: r.text,
            origin,
            source_meta,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct QueryRecord {
    #[serde(rename = "_id")]
    id: String,
    text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metadata: Option<QueryMeta>,
}

#[derive(Serialize, Deserialize)]
struct QueryMeta {
    original_text: String,
    attributes: QueryAttributes,
    character: String,
    scenario: String,
    positive_doc_id: String,
    rewrite_history: Vec<String>,
    provenance: Provenance,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(format!("opening {}", path.display()), e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(format!("creating {}", parent.display()), e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(format!("creating {}", path.display()), e))
}

/// Non-blank lines with their 1-based line numbers.
fn lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        if !line.trim().is_empty() {
            out.push((i + 1, line));
        }
    }
    Ok(out)
}

fn write_lines<T: Serialize>(path: &Path, records: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = create(path)?;
    let ctx = || format!("writing {}", path.display());
    for r in records {
        serde_json::to_writer(&mut w, &r)?;
        w.write_all(b"\n").map_err(|e| Error::io(ctx(), e))?;
    }
    w.flush().map_err(|e| Error::io(ctx(), e))
}

fn check_duplicate(seen: &mut std::collections::HashSet<String>, id: &str, path: &Path, line: usize) -> Result<()> {
    if !seen.insert(id.to_string()) {
        return Err(Error::integrity(format!(
            "{}:{line}: duplicate id `{id}`",
            path.display()
        )));
    }
    Ok(())
}

pub fn read_corpus(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    let path = path.as_ref();
    let mut seen = std::collections::HashSet::new();
    let mut docs = Vec::new();
    for (line_no, line) in lines(path)? {
        let record: CorpusRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(path, line_no, e.to_string()))?;
        check_duplicate(&mut seen, &record.id, path, line_no)?;
        docs.push(Document::from(record));
    }
    Ok(docs)
}

pub fn write_corpus<'a>(docs: impl IntoIterator<Item = &'a Document>, path: impl AsRef<Path>) -> Result<()> {
    write_lines(path.as_ref(), docs.into_iter().map(CorpusRecord::from))
}

/// Reads generated queries; every record must carry its `metadata` object.
pub fn read_queries(path: impl AsRef<Path>) -> Result<Vec<Query>> {
    let path = path.as_ref();
    let mut seen = std::collections::HashSet::new();
    let mut queries = Vec::new();
    for (line_no, line) in lines(path)? {
        let record: QueryRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(path, line_no, e.to_string()))?;
        check_duplicate(&mut seen, &record.id, path, line_no)?;
        let meta = record
            .metadata
            .ok_or_else(|| Error::parse(path, line_no, "query record lacks `metadata`"))?;
        queries.push(Query {
            id: record.id,
            text: record.text,
            original_text: meta.original_text,
            attributes: meta.attributes,
            character: meta.character,
            scenario: meta.scenario,
            positive_doc_id: meta.positive_doc_id,
            rewrite_history: meta.rewrite_history,
            provenance: meta.provenance,
        });
    }
    Ok(queries)
}

/// Reads only `(id, text)` pairs, accepting any query file including ones
/// produced by other tools.
pub fn read_query_texts(path: impl AsRef<Path>) -> Result<Vec<(String, String)>> {
    #[derive(Deserialize)]
    struct Plain {
        #[serde(rename = "_id")]
        id: String,
        text: String,
    }
    let path = path.as_ref();
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for (line_no, line) in lines(path)? {
        let p: Plain = serde_json::from_str(&line).map_err(|e| Error::parse(path, line_no, e.to_string()))?;
        check_duplicate(&mut seen, &p.id, path, line_no)?;
        out.push((p.id, p.text));
    }
    Ok(out)
}

pub fn write_queries<'a>(queries: impl IntoIterator<Item = &'a Query>, path: impl AsRef<Path>) -> Result<()> {
    write_lines(
        path.as_ref(),
        queries.into_iter().map(|q| QueryRecord {
            id: q.id.clone(),
            text: q.text.clone(),
            metadata: Some(QueryMeta {
                original_text: q.original_text.clone(),
                attributes: q.attributes,
                character: q.character.clone(),
                scenario: q.scenario.clone(),
                positive_doc_id: q.positive_doc_id.clone(),
                rewrite_history: q.rewrite_history.clone(),
                provenance: q.provenance.clone(),
            }),
        }),
    )
}

pub fn read_qrels(path: impl AsRef<Path>) -> Result<Vec<Qrel>> {
    let path = path.as_ref();
    let all = lines(path)?;
    let mut iter = all.into_iter().peekable();
    if let Some((_, first)) = iter.peek() {
        if first.trim_end() == QRELS_HEADER {
            iter.next();
        }
    }
    let mut qrels = Vec::new();
    for (line_no, line) in iter {
        let fields: Vec<&str> = line.trim_end_matches(['\r', '\n']).split('\t').collect();
        let [query_id, doc_id, score] = fields.as_slice() else {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected 3 tab-separated fields, got {}", fields.len()),
            ));
        };
        let relevance = match *score {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("score must be 0 or 1, got `{other}`"),
                ));
            }
        };
        if query_id.is_empty() || doc_id.is_empty() {
            return Err(Error::parse(path, line_no, "empty query or corpus id"));
        }
        qrels.push(Qrel::new(*query_id, *doc_id, relevance));
    }
    ensure_unique_pairs(&qrels)?;
    Ok(qrels)
}

pub fn write_qrels<'a>(qrels: impl IntoIterator<Item = &'a Qrel>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let ctx = || format!("writing {}", path.display());
    writeln!(w, "{QRELS_HEADER}").map_err(|e| Error::io(ctx(), e))?;
    for q in qrels {
        writeln!(w, "{}\t{}\t{}", q.query_id, q.doc_id, q.relevance).map_err(|e| Error::io(ctx(), e))?;
    }
    w.flush().map_err(|e| Error::io(ctx(), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{InfoType, LengthBucket, QueryType, Style, META_CHUNK_INDEX, META_PARENT_ID};

    fn sample_docs() -> Vec<Document> {
        vec![
            Document::new("wiki-0", "Plain seed text.").with_title("Seed"),
            Document::new("q-0-hn-0", "Made-up \"negative\"\twith tab").with_origin(Origin::HardNegative),
            Document::new("book-chunk-3", "chunk text")
                .with_origin(Origin::LongDocChunk)
                .with_meta(META_PARENT_ID, "book")
                .with_meta(META_CHUNK_INDEX, "3"),
        ]
    }

    #[test]
    fn corpus_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        let docs = sample_docs();
        write_corpus(&docs, &path).unwrap();
        assert_eq!(read_corpus(&path).unwrap(), docs);
        let first = std::fs::read_to_string(&path).unwrap();
        assert!(first.starts_with(r#"{"_id":"wiki-0","title":"Seed","text":"Plain seed text."}"#));
    }

    #[test]
    fn single_qrel_after_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("qrels.tsv");
        std::fs::write(&path, "query-id\tcorpus-id\tscore\nq1\td7\t1\n").unwrap();
        assert_eq!(read_qrels(&path).unwrap(), vec![Qrel::new("q1", "d7", 1)]);
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        std::fs::write(&path, "{\"_id\":\"a\",\"text\":\"x\"}\n\n{not json}\n").unwrap();
        match read_corpus(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }

        let qpath = dir.path().join("qrels.tsv");
        std::fs::write(&qpath, "query-id\tcorpus-id\tscore\nq1\td1\t1\nq1\td2\n").unwrap();
        match read_qrels(&qpath) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        std::fs::write(&qpath, "q1\td1\t2\n").unwrap();
        assert!(matches!(read_qrels(&qpath), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn duplicate_ids_are_integrity_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        std::fs::write(
            &path,
            "{\"_id\":\"a\",\"text\":\"x\"}\n{\"_id\":\"a\",\"text\":\"y\"}\n",
        )
        .unwrap();
        assert!(matches!(read_corpus(&path), Err(Error::Integrity(_))));

        let qpath = dir.path().join("qrels.tsv");
        std::fs::write(&qpath, "q1\td1\t1\nq1\td1\t0\n").unwrap();
        assert!(matches!(read_qrels(&qpath), Err(Error::Integrity(_))));
    }

    #[test]
    fn queries_round_trip_and_plain_reader() {
        let q = Query {
            id: "q-0".into(),
            text: "how do tides form".into(),
            original_text: "tides?".into(),
            attributes: QueryAttributes {
                length_bucket: LengthBucket::From5To9,
                query_type: QueryType::Question,
                info_type: InfoType::Overall,
                style: Style::Casual,
            },
            character: "a sailor".into(),
            scenario: "planning a trip".into(),
            positive_doc_id: "wiki-0".into(),
            rewrite_history: vec!["tides?".into(), "how do tides form".into()],
            provenance: Provenance {
                iteration: 0,
                seed: 7,
                template_version: "1".into(),
                ..Default::default()
            },
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("queries.jsonl");
        write_queries([&q], &path).unwrap();
        assert_eq!(read_queries(&path).unwrap(), vec![q]);
        assert_eq!(
            read_query_texts(&path).unwrap(),
            vec![("q-0".to_string(), "how do tides form".to_string())]
        );

        std::fs::write(&path, "{\"_id\":\"x\",\"text\":\"foreign query\"}\n").unwrap();
        assert!(read_queries(&path).is_err());
        assert_eq!(read_query_texts(&path).unwrap().len(), 1);
    }
}
