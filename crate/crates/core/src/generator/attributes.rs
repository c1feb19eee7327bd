use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use super::config::GenerationConfig;
use crate::error::Result;
use crate::types::{InfoType, LengthBucket, QueryAttributes, QueryType, Style};

/// Categorical samplers for the four query attributes.
///
/// Fields are drawn independently in the order length, type, info, style.
/// A claim then has its length redrawn from the 10-20 and 20+ buckets with
/// their weights renormalized, so no claim is ever shorter than 10 words.
#[derive(Debug, Clone)]
pub struct AttributeSampler {
    length: WeightedIndex<f64>,
    claim_length: Option<WeightedIndex<f64>>,
    query_type: WeightedIndex<f64>,
    info: WeightedIndex<f64>,
    style: WeightedIndex<f64>,
}

impl AttributeSampler {
    pub fn new(config: &GenerationConfig) -> Result<Self> {
        config.validate()?;
        let idx = |w: &[f64]| WeightedIndex::new(w.iter().copied()).expect("weights validated");
        let long = &config.length_ratio[2..];
        Ok(Self {
            length: idx(&config.length_ratio),
            claim_length: (long.iter().sum::<f64>() > 0.0).then(|| idx(long)),
            query_type: idx(&config.type_ratio),
            info: idx(&config.info_ratio),
            style: idx(&config.style_ratio),
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> QueryAttributes {
        let mut length_bucket = LengthBucket::ALL[self.length.sample(rng)];
        let query_type = QueryType::ALL[self.query_type.sample(rng)];
        let info_type = InfoType::ALL[self.info.sample(rng)];
        let style = Style::ALL[self.style.sample(rng)];
        if query_type == QueryType::Claim {
            let claim = self.claim_length.as_ref().expect("claim weight implies long buckets");
            length_bucket = LengthBucket::ALL[2 + claim.sample(rng)];
        }
        QueryAttributes {
            length_bucket,
            query_type,
            info_type,
            style,
        }
    }
}

pub fn sample_attributes<R: Rng + ?Sized>(config: &GenerationConfig, rng: &mut R) -> Result<QueryAttributes> {
    Ok(AttributeSampler::new(config)?.sample(rng))
}

/// Number of hard negatives to request, uniform over the configured range.
pub fn sample_hard_negative_count<R: Rng + ?Sized>(config: &GenerationConfig, rng: &mut R) -> usize {
    let [lo, hi] = config.hard_negative_range;
    rng.gen_range(lo..=hi)
}
