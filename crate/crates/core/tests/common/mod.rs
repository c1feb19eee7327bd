#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use irbench::generator::parse::fenced_blocks;
use irbench::generator::CandidateSets;
use irbench::providers::mock::FnChat;
use irbench::providers::ChatProvider;
use irbench::tokenize::{terms, Tokenizer};
use irbench::types::{
    Document, InfoType, LengthBucket, Origin, Provenance, Qrel, Query, QueryAttributes, QueryType, Style, META_QUERY_ID,
};

pub fn query(id: &str, text: &str, positive: &str) -> Query {
    Query {
        id: id.into(),
        text: text.into(),
        original_text: text.into(),
        attributes: QueryAttributes {
            length_bucket: LengthBucket::From5To9,
            query_type: QueryType::Question,
            info_type: InfoType::Overall,
            style: Style::Concise,
        },
        character: "analyst".into(),
        scenario: "writing a report".into(),
        positive_doc_id: positive.into(),
        rewrite_history: vec![text.into()],
        provenance: Provenance::default(),
    }
}

pub fn hard_negative(query_id: &str, j: usize, text: &str) -> Document {
    Document::new(format!("{query_id}-hn-{j}"), text)
        .with_origin(Origin::HardNegative)
        .with_meta(META_QUERY_ID, query_id)
}

/// One query over a 30-document seed corpus. Its positive is `synth-0`, it
/// has hard negatives `q-0-hn-0..3`, and the documents named in the returned
/// set are the ones a judge should call relevant: the positive, hard
/// negative `q-0-hn-1` and corpus document `synth-5`.
pub struct QcFixture {
    pub seed: Vec<Document>,
    pub candidates: CandidateSets,
    pub relevant: HashSet<String>,
    pub false_negative: String,
    pub unlabeled_positive: String,
}

pub fn qc_fixture() -> QcFixture {
    let seed = irbench::synthetic::synthetic_corpus(30, 1);
    let positive = seed[0].clone();
    let q = query("q-0", "what does the first document say", &positive.id);
    let hns: Vec<Document> = (0..3)
        .map(|j| {
            hard_negative(
                "q-0",
                j,
                &format!("decoy passage number {j} about nothing in particular"),
            )
        })
        .collect();
    let candidates = CandidateSets {
        queries: vec![q],
        positives: vec![positive.clone()],
        neg_qrels: hns.iter().map(|d| Qrel::new("q-0", &d.id, 0)).collect(),
        hard_negatives: hns,
        pos_qrels: vec![Qrel::new("q-0", &positive.id, 1)],
    };
    let relevant = [positive.id.as_str(), "q-0-hn-1", "synth-5"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    QcFixture {
        seed,
        candidates,
        relevant,
        false_negative: "q-0-hn-1".into(),
        unlabeled_positive: "synth-5".into(),
    }
}

/// A judge that answers 3 for documents whose text is in `relevant_texts`
/// and 0 otherwise.
pub fn judging_chat(relevant_texts: HashSet<String>) -> impl ChatProvider {
    FnChat(move |prompt: &str| {
        let blocks = fenced_blocks(prompt);
        let doc = blocks.get(1).map(|b| b.trim()).unwrap_or_default();
        Ok(if relevant_texts.contains(doc) { "3" } else { "0" }.to_string())
    })
}

pub fn texts_of(docs: &[&Document], ids: &HashSet<String>) -> HashSet<String> {
    docs.iter()
        .filter(|d| ids.contains(&d.id))
        .map(|d| d.text.trim().to_string())
        .collect()
}

/// nDCG@k written out term by term from the definition.
pub fn ndcg_oracle(run: &[String], positives: &HashSet<String>, k: usize) -> Option<f64> {
    if positives.is_empty() {
        return None;
    }
    let mut dcg = 0.0;
    let mut seen: Vec<&String> = Vec::new();
    let mut rank = 0usize;
    for d in run {
        if seen.contains(&d) {
            continue;
        }
        seen.push(d);
        rank += 1;
        if rank > k {
            break;
        }
        if positives.contains(d) {
            dcg += 1.0 / (rank as f64 + 1.0).log2();
        }
    }
    let mut idcg = 0.0;
    for i in 1..=k.min(positives.len()) {
        idcg += 1.0 / (i as f64 + 1.0).log2();
    }
    Some(dcg / idcg)
}

pub fn recall_oracle(run: &[String], positives: &HashSet<String>, k: usize) -> Option<f64> {
    if positives.is_empty() {
        return None;
    }
    let mut top: Vec<&String> = Vec::new();
    for d in run {
        if !top.contains(&d) {
            top.push(d);
        }
    }
    top.truncate(k);
    let hit: HashSet<&String> = top.into_iter().filter(|d| positives.contains(*d)).collect();
    Some(hit.len() as f64 / positives.len() as f64)
}

/// BM25 of every document for `query`, straight from the formula with no
/// index.
pub fn bm25_oracle(docs: &[Document], query: &str, tokenizer: &dyn Tokenizer, k1: f64, b: f64) -> Vec<(String, f64)> {
    let doc_terms: Vec<Vec<String>> = docs.iter().map(|d| terms(&d.text, tokenizer)).collect();
    let n = docs.len() as f64;
    let avgdl = doc_terms.iter().map(|t| t.len() as f64).sum::<f64>() / n;
    let q = terms(query, tokenizer);
    let mut out = Vec::new();
    for (d, dt) in docs.iter().zip(&doc_terms) {
        let mut score = 0.0;
        let mut matched = false;
        for t in &q {
            let tf = dt.iter().filter(|x| *x == t).count() as f64;
            if tf == 0.0 {
                continue;
            }
            matched = true;
            let df = doc_terms.iter().filter(|o| o.contains(t)).count() as f64;
            let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
            score += idf * tf / (tf + k1 * (1.0 - b + b * dt.len() as f64 / avgdl));
        }
        if matched {
            out.push((d.id.clone(), score));
        }
    }
    out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    out
}

pub fn positives_by_query(qrels: &[Qrel]) -> HashMap<String, HashSet<String>> {
    let mut m: HashMap<String, HashSet<String>> = HashMap::new();
    for r in qrels.iter().filter(|r| r.relevance > 0) {
        m.entry(r.query_id.clone()).or_default().insert(r.doc_id.clone());
    }
    m
}
