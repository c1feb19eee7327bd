use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

pub const DEFAULT_PERMUTATIONS: usize = 10_000;
pub const DEFAULT_SAMPLE_SIZE: usize = 2000;
pub const DEFAULT_TRIALS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpearmanResult {
    pub rho: f64,
    pub p_value: f64,
}

fn check_ranks(name: &str, ranks: &[usize]) -> Result<()> {
    let n = ranks.len();
    let mut seen = vec![false; n + 1];
    for &r in ranks {
        if r == 0 || r > n {
            return Err(Error::Unsupported(format!("{name}: rank {r} outside 1..={n}")));
        }
        if std::mem::replace(&mut seen[r], true) {
            return Err(Error::Unsupported(format!("{name}: tied rank {r}")));
        }
    }
    Ok(())
}

fn rho_of(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let d2: f64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

/// Spearman's rho between two untied rank vectors, with a two-tailed
/// p-value from the t distribution on `n - 2` degrees of freedom.
pub fn spearman(ranks_a: &[usize], ranks_b: &[usize]) -> Result<SpearmanResult> {
    if ranks_a.len() != ranks_b.len() {
        return Err(Error::Unsupported(format!(
            "rank vectors differ in length ({} vs {})",
            ranks_a.len(),
            ranks_b.len()
        )));
    }
    if ranks_a.len() < 3 {
        return Err(Error::Unsupported("spearman needs at least 3 items".into()));
    }
    check_ranks("ranks_a", ranks_a)?;
    check_ranks("ranks_b", ranks_b)?;
    let rho = rho_of(ranks_a, ranks_b);
    let df = (ranks_a.len() - 2) as f64;
    let p_value = if 1.0 - rho.abs() < 1e-15 {
        0.0
    } else {
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Unsupported(e.to_string()))?;
        (2.0 * dist.sf(t.abs())).min(1.0)
    };
    Ok(SpearmanResult { rho, p_value })
}

/// Two-tailed permutation p-value, `(count + 1) / (shuffles + 1)` where
/// `count` is the number of shuffles of `ranks_b` with `|rho|` at least the
/// observed one.
pub fn spearman_permutation(
    ranks_a: &[usize],
    ranks_b: &[usize],
    shuffles: usize,
    seed: u64,
) -> Result<SpearmanResult> {
    let observed = spearman(ranks_a, ranks_b)?.rho;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = ranks_b.to_vec();
    let mut count = 0usize;
    for _ in 0..shuffles {
        b.shuffle(&mut rng);
        if rho_of(ranks_a, &b).abs() >= observed.abs() - 1e-12 {
            count += 1;
        }
    }
    Ok(SpearmanResult {
        rho: observed,
        p_value: (count + 1) as f64 / (shuffles + 1) as f64,
    })
}

/// 1-based ranks by descending score, ties broken by ascending key.
pub fn rank_by_score(scores: &BTreeMap<String, f64>) -> BTreeMap<String, usize> {
    let mut order: Vec<(&String, f64)> = scores.iter().map(|(k, v)| (k, *v)).collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    order
        .into_iter()
        .enumerate()
        .map(|(i, (k, _))| (k.clone(), i + 1))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub model_ids: Vec<String>,
    pub ranks_a: Vec<usize>,
    pub ranks_b: Vec<usize>,
    pub rho: f64,
    pub p_value: f64,
}

pub fn consistency_analysis(
    scores_a: &BTreeMap<String, f64>,
    scores_b: &BTreeMap<String, f64>,
) -> Result<ConsistencyReport> {
    if scores_a.keys().ne(scores_b.keys()) {
        let only_a: Vec<_> = scores_a.keys().filter(|k| !scores_b.contains_key(*k)).collect();
        let only_b: Vec<_> = scores_b.keys().filter(|k| !scores_a.contains_key(*k)).collect();
        return Err(Error::Unsupported(format!(
            "model sets differ: only in a {only_a:?}, only in b {only_b:?}"
        )));
    }
    if let Some((k, _)) = scores_a.iter().chain(scores_b).find(|(_, v)| !v.is_finite()) {
        return Err(Error::Unsupported(format!("score for `{k}` is not finite")));
    }
    let ra = rank_by_score(scores_a);
    let rb = rank_by_score(scores_b);
    let model_ids: Vec<String> = ra.keys().cloned().collect();
    let ranks_a: Vec<usize> = model_ids.iter().map(|m| ra[m]).collect();
    let ranks_b: Vec<usize> = model_ids.iter().map(|m| rb[m]).collect();
    let s = spearman(&ranks_a, &ranks_b)?;
    Ok(ConsistencyReport {
        model_ids,
        ranks_a,
        ranks_b,
        rho: s.rho,
        p_value: s.p_value,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    /// Consistency on the whole query universe.
    pub full: ConsistencyReport,
    pub trials: Vec<SpearmanResult>,
    pub mean_rho: f64,
    /// Population standard deviation of the trial rhos.
    pub std_rho: f64,
}

/// Mean score per model over the given query indices of `universe`, summed
/// in index order.
fn subset_means(
    per_query: &BTreeMap<String, BTreeMap<String, f64>>,
    universe: &[&String],
    indices: &[usize],
) -> BTreeMap<String, f64> {
    per_query
        .iter()
        .map(|(m, scores)| {
            let sum: f64 = indices.iter().map(|&i| scores[universe[i]]).sum();
            (m.clone(), sum / indices.len() as f64)
        })
        .collect()
}

/// Repeatedly samples `sample_size` queries without replacement, ranks the
/// models by their mean score on the sample, and compares that ranking with
/// `reference`.
pub fn robustness_resample(
    per_query: &BTreeMap<String, BTreeMap<String, f64>>,
    reference: &BTreeMap<String, f64>,
    sample_size: usize,
    trials: usize,
    seed: u64,
) -> Result<RobustnessReport> {
    let Some(first) = per_query.values().next() else {
        return Err(Error::EmptyInput("no models to resample".into()));
    };
    let universe: Vec<&String> = first.keys().collect();
    if let Some((m, _)) = per_query.iter().find(|(_, s)| s.keys().ne(first.keys())) {
        return Err(Error::Unsupported(format!(
            "model `{m}` is scored on a different query set"
        )));
    }
    if sample_size == 0 || sample_size > universe.len() {
        return Err(Error::Unsupported(format!(
            "sample size {sample_size} must lie in 1..={}",
            universe.len()
        )));
    }
    let all: Vec<usize> = (0..universe.len()).collect();
    let full = consistency_analysis(reference, &subset_means(per_query, &universe, &all))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut results = Vec::with_capacity(trials);
    for _ in 0..trials {
        let mut idx = rand::seq::index::sample(&mut rng, universe.len(), sample_size).into_vec();
        idx.sort_unstable();
        let r = consistency_analysis(reference, &subset_means(per_query, &universe, &idx))?;
        results.push(SpearmanResult {
            rho: r.rho,
            p_value: r.p_value,
        });
    }
    let n = results.len().max(1) as f64;
    let mean_rho = results.iter().map(|r| r.rho).sum::<f64>() / n;
    let var = results.iter().map(|r| (r.rho - mean_rho).powi(2)).sum::<f64>() / n;
    Ok(RobustnessReport {
        full,
        trials: results,
        mean_rho,
        std_rho: var.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_and_reversed() {
        let v: Vec<usize> = (1..=6).collect();
        let r: Vec<usize> = v.iter().rev().copied().collect();
        assert_eq!(spearman(&v, &v).unwrap().rho, 1.0);
        assert_eq!(spearman(&v, &r).unwrap().rho, -1.0);
    }

    #[test]
    fn rejects_ties_and_mismatch() {
        assert!(matches!(spearman(&[1, 1, 3], &[1, 2, 3]), Err(Error::Unsupported(_))));
        assert!(matches!(spearman(&[1, 2, 3], &[1, 2]), Err(Error::Unsupported(_))));
        assert!(spearman(&[1, 2], &[2, 1]).is_err());
        assert!(spearman(&[0, 1, 2], &[1, 2, 3]).is_err());
    }

    #[test]
    fn permutation_agrees_roughly_with_t() {
        let a: Vec<usize> = (1..=10).collect();
        let b = vec![2, 1, 4, 3, 6, 5, 8, 7, 10, 9];
        let t = spearman(&a, &b).unwrap();
        let p = spearman_permutation(&a, &b, 2000, 1).unwrap();
        assert_eq!(t.rho, p.rho);
        assert!(p.p_value < 0.01 && t.p_value < 0.01);
    }

    #[test]
    fn consistency_ranks_descending_with_id_ties() {
        let a: BTreeMap<String, f64> = [("x", 1.0), ("y", 3.0), ("z", 2.0), ("w", 2.0)]
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        let ranks = rank_by_score(&a);
        assert_eq!(ranks["y"], 1);
        assert_eq!(ranks["w"], 2);
        assert_eq!(ranks["z"], 3);
        let neg: BTreeMap<String, f64> = a.iter().map(|(k, v)| (k.clone(), -v)).collect();
        let same = consistency_analysis(&a, &a).unwrap();
        assert_eq!(same.rho, 1.0);
        assert_eq!(same.p_value, 0.0);
        let mut b = a.clone();
        b.insert("extra".into(), 0.0);
        assert!(consistency_analysis(&a, &b).is_err());
        assert!(consistency_analysis(&a, &neg).unwrap().rho < -0.7);
    }
}
