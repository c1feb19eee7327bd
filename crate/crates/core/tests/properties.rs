mod common;

use std::collections::HashSet;

use proptest::prelude::*;

use irbench::corpus::{chunk_windows, ChunkConfig};
use irbench::eval::{bm25_build, format_run, ndcg_at_k, parse_run, recall_at_k, spearman, weighted_jaccard};
use irbench::tokenize::WordPunctTokenizer;
use irbench::types::{Document, RankedList};

use common::{bm25_oracle, ndcg_oracle};

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("d{i}")).collect()
}

/// A ranking over a prefix of `d0..d{n}` plus a positive set.
fn ranking_and_positives() -> impl Strategy<Value = (Vec<String>, HashSet<String>, usize)> {
    (1usize..40).prop_flat_map(|n| {
        (
            Just(ids(n)).prop_shuffle(),
            proptest::collection::hash_set(0..n, 0..=n.min(10)),
            1usize..25,
        )
            .prop_map(|(run, pos, k)| (run, pos.into_iter().map(|i| format!("d{i}")).collect(), k))
    })
}

fn word() -> impl Strategy<Value = String> {
    prop::sample::select(vec![
        "river", "stone", "lamp", "orbit", "maple", "cable", "signal", "harbor",
    ])
    .prop_map(str::to_string)
}

fn corpus() -> impl Strategy<Value = Vec<Document>> {
    proptest::collection::vec(proptest::collection::vec(word(), 1..15), 1..12).prop_map(|docs| {
        docs.into_iter()
            .enumerate()
            .map(|(i, w)| Document::new(format!("d{i}"), w.join(" ")))
            .collect()
    })
}

proptest! {
    #[test]
    fn metrics_are_bounded_and_match_oracle((run, pos, k) in ranking_and_positives()) {
        let refs: HashSet<&str> = pos.iter().map(String::as_str).collect();
        let n = ndcg_at_k(run.iter().map(String::as_str), &refs, k);
        let r = recall_at_k(run.iter().map(String::as_str), &refs, k);
        prop_assert_eq!(n.is_none(), pos.is_empty());
        prop_assert_eq!(r.is_none(), pos.is_empty());
        if let (Some(n), Some(r)) = (n, r) {
            prop_assert!((0.0..=1.0).contains(&n));
            prop_assert!((0.0..=1.0).contains(&r));
            prop_assert!((n - ndcg_oracle(&run, &pos, k).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn positives_first_is_perfect((run, pos, k) in ranking_and_positives()) {
        prop_assume!(!pos.is_empty());
        let mut ideal: Vec<&String> = run.iter().filter(|d| pos.contains(*d)).collect();
        ideal.extend(run.iter().filter(|d| !pos.contains(*d)));
        let refs: HashSet<&str> = pos.iter().map(String::as_str).collect();
        let n = ndcg_at_k(ideal.iter().map(|s| s.as_str()), &refs, k).unwrap();
        prop_assert!((n - 1.0).abs() < 1e-12);
        let r = recall_at_k(ideal.iter().map(|s| s.as_str()), &refs, k).unwrap();
        prop_assert!((r - (k.min(pos.len()) as f64 / pos.len() as f64)).abs() < 1e-12);
    }

    #[test]
    fn windows_cover_with_exact_overlap(n in 1usize..3000, size in 2usize..300, frac in 0.0f64..0.9) {
        let overlap = ((size as f64) * frac) as usize;
        let cfg = ChunkConfig { chunk_size: size, overlap };
        let w = chunk_windows(n, cfg).unwrap();
        prop_assert_eq!(w[0].start, 0);
        prop_assert_eq!(w.last().unwrap().end, n);
        for pair in w.windows(2) {
            prop_assert_eq!(pair[0].end - pair[1].start, overlap);
            prop_assert_eq!(pair[0].len(), size);
        }
    }

    #[test]
    fn bm25_matches_oracle(docs in corpus(), q in proptest::collection::vec(word(), 1..5)) {
        let query = q.join(" ");
        let index = bm25_build(&docs, &WordPunctTokenizer).unwrap();
        let got = index.search("q", &query, &WordPunctTokenizer, docs.len());
        let want = bm25_oracle(&docs, &query, &WordPunctTokenizer, index.k1, index.b);
        prop_assert_eq!(got.len(), want.len());
        for w in got.entries.windows(2) {
            prop_assert!(w[0].1 >= w[1].1);
        }
        for ((gd, gs), (wd, ws)) in got.entries.iter().zip(&want) {
            prop_assert_eq!(gd, wd);
            prop_assert!((gs - ws).abs() < 1e-9);
            prop_assert!(*gs > 0.0);
        }
    }

    #[test]
    fn spearman_is_symmetric_and_bounded(perm in Just((1usize..=12).collect::<Vec<_>>()).prop_shuffle()) {
        let id: Vec<usize> = (1..=12).collect();
        let ab = spearman(&id, &perm).unwrap();
        let ba = spearman(&perm, &id).unwrap();
        prop_assert!((ab.rho - ba.rho).abs() < 1e-15);
        prop_assert!((-1.0..=1.0).contains(&ab.rho));
        prop_assert!((0.0..=1.0).contains(&ab.p_value));
        let rev: Vec<usize> = perm.iter().map(|r| 13 - r).collect();
        prop_assert!((spearman(&id, &rev).unwrap().rho + ab.rho).abs() < 1e-12);
        prop_assert_eq!(spearman(&perm, &perm).unwrap().rho, 1.0);
    }

    #[test]
    fn jaccard_is_symmetric(a in corpus(), b in corpus()) {
        let t = &WordPunctTokenizer;
        let ab = weighted_jaccard(&a, &b, t).unwrap();
        let ba = weighted_jaccard(&b, &a, t).unwrap();
        prop_assert!((ab - ba).abs() < 1e-15);
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(weighted_jaccard(&a, &a, t).unwrap(), 1.0);
    }

    #[test]
    fn run_files_round_trip(scores in proptest::collection::vec(proptest::collection::vec(-1e6f64..1e6, 0..20), 1..6)) {
        let lists: Vec<RankedList> = scores
            .iter()
            .enumerate()
            .map(|(q, s)| RankedList::from_scores(format!("q{q}"), s.iter().enumerate().map(|(d, x)| (format!("d{d}"), *x)).collect()))
            .filter(|l| !l.is_empty())
            .collect();
        let text = format_run(&lists, "prop");
        let back = parse_run(&text, std::path::Path::new("mem")).unwrap();
        prop_assert_eq!(back, lists);
    }
}
