//! Reranks the BM25 top 100 with a cross-encoder stand-in and compares
//! nDCG@10 before and after.

use std::collections::HashMap;

use irbench::eval::{bm25_build, evaluate_qrels, rerank_eval, Metric};
use irbench::providers::mock::TokenOverlapReranker;
use irbench::synthetic::synthetic_corpus;
use irbench::tokenize::WordPunctTokenizer;
use irbench::types::Qrel;

fn main() -> irbench::Result<()> {
    let docs = synthetic_corpus(400, 9);
    let tokenizer = WordPunctTokenizer;
    let index = bm25_build(&docs, &tokenizer)?;
    let texts: HashMap<&str, &str> = docs.iter().map(|d| (d.id.as_str(), d.text.as_str())).collect();

    let mut queries = HashMap::new();
    let mut qrels = Vec::new();
    let mut first = Vec::new();
    for (i, d) in docs.iter().step_by(40).enumerate() {
        let q: Vec<&str> = d.text.split_whitespace().skip(10).take(4).collect();
        let qid = format!("q{i}");
        first.push(index.search(&qid, &q.join(" "), &tokenizer, 1000));
        qrels.push(Qrel::new(&qid, &d.id, 1));
        queries.insert(qid, q.join(" "));
    }
    let ids: Vec<String> = first.iter().map(|r| r.query_id.clone()).collect();

    let reranker = TokenOverlapReranker::new("overlap");
    let qt = |id: &str| queries.get(id).cloned();
    let dt = |id: &str| texts.get(id).map(|s| s.to_string());
    let out = rerank_eval(&first, &qt, &dt, &reranker, 100, 4)?;

    let before = evaluate_qrels(&first, &qrels, &ids, None, Metric::Ndcg, 10);
    let after = evaluate_qrels(&out.runs, &qrels, &ids, None, Metric::Ndcg, 10);
    println!("bm25     {}: {:.4}", before.label(), before.mean);
    println!(
        "reranked {}: {:.4} ({} failed)",
        after.label(),
        after.mean,
        out.failed.len()
    );
    Ok(())
}
