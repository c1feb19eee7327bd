//! Indexes a small corpus with BM25, searches it and scores the run with
//! nDCG@10 and Recall@10.

use std::collections::HashSet;

use irbench::eval::{bm25_build, evaluate_qrels, format_run, Metric};
use irbench::synthetic::synthetic_corpus;
use irbench::tokenize::WordPunctTokenizer;
use irbench::types::Qrel;

fn main() -> irbench::Result<()> {
    let docs = synthetic_corpus(300, 5);
    let tokenizer = WordPunctTokenizer;
    let index = bm25_build(&docs, &tokenizer)?;
    println!(
        "{} documents, {} terms, avgdl {:.1}",
        index.doc_count(),
        index.postings.len(),
        index.avgdl
    );

    // each query is a few words lifted from its target document
    let mut runs = Vec::new();
    let mut qrels = Vec::new();
    let mut ids = Vec::new();
    for (i, d) in docs.iter().step_by(30).enumerate() {
        let words: Vec<&str> = d.text.split_whitespace().skip(3).take(5).collect();
        let qid = format!("q{i}");
        runs.push(index.search(&qid, &words.join(" "), &tokenizer, 100));
        qrels.push(Qrel::new(&qid, &d.id, 1));
        ids.push(qid);
    }
    print!(
        "{}",
        format_run(&runs[..1], "bm25")
            .lines()
            .take(3)
            .collect::<Vec<_>>()
            .join("\n")
    );
    println!();

    let known: HashSet<&str> = docs.iter().map(|d| d.id.as_str()).collect();
    for metric in [Metric::Ndcg, Metric::Recall] {
        let r = evaluate_qrels(&runs, &qrels, &ids, Some(&known), metric, 10);
        println!("{} = {:.4} over {} queries", r.label(), r.mean, r.per_query.len());
    }
    Ok(())
}
