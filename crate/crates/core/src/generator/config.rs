use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::Task;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationConfig {
    pub task: Task,
    pub n_queries: usize,
    /// Under 5 / 5 to 9 / 10 to 20 / over 20 words.
    pub length_ratio: [f64; 4],
    /// Question / problem / claim.
    pub type_ratio: [f64; 3],
    /// Overall / partial information.
    pub info_ratio: [f64; 2],
    /// Concise / casual / informal / formal / professional / complicated / academic.
    pub style_ratio: [f64; 7],
    /// Inclusive bounds on hard negatives requested per query.
    pub hard_negative_range: [usize; 2],
    pub rewrite_max_iters: usize,
    pub rewrite_overlap_threshold: f64,
    pub rng_seed: u64,
    pub workers: usize,
}

impl GenerationConfig {
    pub fn new(task: Task) -> Self {
        let qa = Self {
            task: Task::Qa,
            n_queries: 100,
            length_ratio: [1.0, 4.0, 2.0, 1.0],
            type_ratio: [3.0, 1.0, 1.0],
            info_ratio: [1.0, 1.0],
            style_ratio: [5.0, 3.0, 3.0, 1.0, 1.0, 1.0, 1.0],
            hard_negative_range: [3, 7],
            rewrite_max_iters: 3,
            rewrite_overlap_threshold: 0.6,
            rng_seed: 42,
            workers: 8,
        };
        match task {
            Task::Qa => qa,
            Task::LongDoc => Self {
                task: Task::LongDoc,
                type_ratio: [3.0, 0.0, 1.0],
                hard_negative_range: [0, 0],
                ..qa
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn weights(name: &str, w: &[f64]) -> Result<()> {
            if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(Error::config(format!("{name} weights must be finite and nonnegative")));
            }
            if w.iter().sum::<f64>() <= 0.0 {
                return Err(Error::config(format!("{name} weights must have a positive sum")));
            }
            Ok(())
        }
        weights("length", &self.length_ratio)?;
        weights("type", &self.type_ratio)?;
        weights("info", &self.info_ratio)?;
        weights("style", &self.style_ratio)?;
        if self.type_ratio[2] > 0.0 && self.length_ratio[2] + self.length_ratio[3] <= 0.0 {
            return Err(Error::config(
                "claim queries need positive weight on the 10-20 or 20+ word buckets",
            ));
        }
        let [lo, hi] = self.hard_negative_range;
        if lo > hi {
            return Err(Error::config(format!("hard_negative_range [{lo}, {hi}] is inverted")));
        }
        if self.n_queries == 0 {
            return Err(Error::config("n_queries must be positive"));
        }
        if self.rewrite_max_iters == 0 {
            return Err(Error::config("rewrite_max_iters must be positive"));
        }
        if !(0.0..=1.0).contains(&self.rewrite_overlap_threshold) {
            return Err(Error::config("rewrite_overlap_threshold must lie in [0, 1]"));
        }
        if self.workers == 0 {
            return Err(Error::config("workers must be positive"));
        }
        if self.task == Task::LongDoc {
            if self.type_ratio[1] > 0.0 {
                return Err(Error::config(
                    "long-document generation uses question and claim types only",
                ));
            }
            if self.hard_negative_range != [0, 0] {
                return Err(Error::config("long-document generation does not create hard negatives"));
            }
        }
        Ok(())
    }
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self::new(Task::Qa)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        GenerationConfig::new(Task::Qa).validate().unwrap();
        let ld = GenerationConfig::new(Task::LongDoc);
        ld.validate().unwrap();
        assert_eq!(ld.hard_negative_range, [0, 0]);
        assert_eq!(ld.type_ratio, [3.0, 0.0, 1.0]);
    }

    #[test]
    fn rejects_bad_weights_and_ranges() {
        let base = GenerationConfig::default();
        for cfg in [
            GenerationConfig {
                length_ratio: [0.0; 4],
                ..base.clone()
            },
            GenerationConfig {
                style_ratio: [1.0, -1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
                ..base.clone()
            },
            GenerationConfig {
                hard_negative_range: [5, 3],
                ..base.clone()
            },
            GenerationConfig {
                length_ratio: [1.0, 1.0, 0.0, 0.0],
                ..base.clone()
            },
            GenerationConfig {
                rewrite_overlap_threshold: 1.5,
                ..base.clone()
            },
            GenerationConfig {
                task: Task::LongDoc,
                ..base.clone()
            },
        ] {
            assert!(matches!(cfg.validate(), Err(Error::Config(_))), "{cfg:?}");
        }
    }
}
