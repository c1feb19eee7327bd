use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::types::{Split, Task};

pub const DEFAULT_DEV_FRACTION: f64 = 0.2;

/// QA queries are shuffled with `seed` and the first `round(n * dev_fraction)`
/// become dev. Long-document datasets are split per dataset rather than per
/// query, so every query gets `long_doc_split`.
pub fn split_queries(
    query_ids: &[String],
    task: Task,
    dev_fraction: f64,
    seed: u64,
    long_doc_split: Split,
) -> Result<BTreeMap<String, Split>> {
    if query_ids.is_empty() {
        return Err(Error::EmptyInput("no queries to split".into()));
    }
    if !(0.0..=1.0).contains(&dev_fraction) {
        return Err(Error::config(format!("dev fraction {dev_fraction} is outside [0, 1]")));
    }
    if task == Task::LongDoc {
        return Ok(query_ids.iter().map(|q| (q.clone(), long_doc_split)).collect());
    }
    let mut order: Vec<&String> = query_ids.iter().collect();
    order.sort();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_dev = (query_ids.len() as f64 * dev_fraction).round() as usize;
    Ok(order
        .into_iter()
        .enumerate()
        .map(|(i, q)| (q.clone(), if i < n_dev { Split::Dev } else { Split::Test }))
        .collect())
}
