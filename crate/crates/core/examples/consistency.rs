//! Spearman agreement between two model rankings, with the t-approximation
//! and a permutation p-value.

use std::collections::BTreeMap;

use irbench::eval::{consistency_analysis, spearman, spearman_permutation};

fn main() -> irbench::Result<()> {
    let real: Vec<usize> = (1..=17).collect();
    let synthetic = [1, 4, 5, 8, 3, 2, 10, 11, 9, 7, 14, 13, 12, 6, 15, 16, 17];
    let s = spearman(&real, &synthetic)?;
    println!("rho {:.4}, p {:.2e}", s.rho, s.p_value);
    let p = spearman_permutation(&real, &synthetic, 10_000, 42)?;
    println!("permutation p {:.2e}", p.p_value);

    // ranks can also come from per-model scores
    let a: BTreeMap<String, f64> = [
        ("bm25", 26.2),
        ("dense-small", 41.7),
        ("dense-large", 48.0),
        ("hybrid", 44.1),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    let b: BTreeMap<String, f64> = [
        ("bm25", 34.2),
        ("dense-small", 48.1),
        ("dense-large", 59.6),
        ("hybrid", 52.6),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    let r = consistency_analysis(&a, &b)?;
    for ((m, x), y) in r.model_ids.iter().zip(&r.ranks_a).zip(&r.ranks_b) {
        println!("{m:<12} {x} {y}");
    }
    println!("rho {:.4}", r.rho);
    Ok(())
}
