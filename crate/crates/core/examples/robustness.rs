//! Checks how stable a model ranking is when it is computed from random
//! subsets of the query set.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use irbench::eval::robustness_resample;

fn main() -> irbench::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let models = 10;
    let queries = 5000;
    let mut per_query = BTreeMap::new();
    let mut reference = BTreeMap::new();
    for m in 0..models {
        let quality = 0.3 + 0.03 * m as f64;
        let scores: BTreeMap<String, f64> = (0..queries)
            .map(|q| (format!("q{q}"), (quality + rng.gen_range(-0.4..0.4)).clamp(0.0, 1.0)))
            .collect();
        per_query.insert(format!("model-{m}"), scores);
        reference.insert(format!("model-{m}"), quality);
    }
    for size in [100, 500, 2000] {
        let r = robustness_resample(&per_query, &reference, size, 30, 7)?;
        println!("{size:>5} queries: mean rho {:.4}, std {:.4}", r.mean_rho, r.std_rho);
    }
    Ok(())
}
