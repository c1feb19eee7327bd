use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::TemplateSet;
use crate::providers::{ChatParams, ChatProvider};
use crate::types::Query;

pub const TYPE_LABELS: [&str; 10] = [
    "how", "what", "when", "where", "which", "who", "why", "yes-no", "claim", "others",
];
pub const STYLE_LABELS: [&str; 8] = [
    "formal",
    "informal",
    "professional",
    "casual",
    "complicated",
    "concise",
    "academic",
    "others",
];
pub const FALLBACK_LABEL: &str = "others";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Facet {
    Type,
    Style,
}

impl Facet {
    pub fn labels(self) -> &'static [&'static str] {
        match self {
            Facet::Type => &TYPE_LABELS,
            Facet::Style => &STYLE_LABELS,
        }
    }

    fn template(self) -> &'static str {
        match self {
            Facet::Type => "label_type",
            Facet::Style => "label_style",
        }
    }
}

impl fmt::Display for Facet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Facet::Type => "type",
            Facet::Style => "style",
        })
    }
}

impl FromStr for Facet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "type" => Ok(Facet::Type),
            "style" => Ok(Facet::Style),
            other => Err(Error::config(format!(
                "unknown facet `{other}` (expected type or style)"
            ))),
        }
    }
}

/// Maps a free-form reply onto the facet's label set. An exact match wins;
/// otherwise the reply must mention exactly one label as a whole word.
pub fn parse_label(reply: &str, facet: Facet) -> Option<&'static str> {
    let norm = reply
        .trim()
        .to_lowercase()
        .replace("yes/no", "yes-no")
        .replace("yes or no", "yes-no")
        .replace("yes no", "yes-no");
    let cleaned = norm.trim_matches(|c: char| !c.is_alphanumeric());
    if let Some(l) = facet.labels().iter().find(|l| **l == cleaned) {
        return Some(l);
    }
    let words: Vec<&str> = norm
        .split(|c: char| !(c.is_alphanumeric() || c == '-'))
        .filter(|w| !w.is_empty())
        .collect();
    let mut found = facet.labels().iter().filter(|l| words.contains(l));
    match (found.next(), found.next()) {
        (Some(l), None) => Some(l),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityOutput {
    pub facet: Facet,
    pub labels: BTreeMap<String, String>,
    /// Queries labeled `others` because the provider call failed.
    pub failed: Vec<String>,
}

impl DiversityOutput {
    /// `(label, count, proportion)` in the facet's label order.
    pub fn distribution(&self) -> Vec<(&'static str, usize, f64)> {
        let total = self.labels.len();
        self.facet
            .labels()
            .iter()
            .map(|l| {
                let n = self.labels.values().filter(|v| v == l).count();
                let p = if total == 0 { 0.0 } else { n as f64 / total as f64 };
                (*l, n, p)
            })
            .collect()
    }
}

pub fn label_query_diversity(
    queries: &[Query],
    chat: &dyn ChatProvider,
    templates: &TemplateSet,
    facet: Facet,
    workers: usize,
) -> Result<DiversityOutput> {
    let pool = super::pool(workers)?;
    let results: Vec<(String, Option<&'static str>)> = pool.install(|| {
        queries
            .par_iter()
            .map(|q| {
                let reply = templates
                    .render(facet.template(), &[("query", q.text.as_str())])
                    .and_then(|prompt| chat.complete(&prompt, &ChatParams::JUDGING));
                match reply {
                    Ok(r) => (q.id.clone(), Some(parse_label(&r, facet).unwrap_or(FALLBACK_LABEL))),
                    Err(e) => {
                        tracing::warn!(query = %q.id, error = %e, "labeling failed");
                        (q.id.clone(), None)
                    }
                }
            })
            .collect()
    });
    let mut out = DiversityOutput {
        facet,
        labels: BTreeMap::new(),
        failed: Vec::new(),
    };
    for (id, label) in results {
        if label.is_none() {
            out.failed.push(id.clone());
        }
        out.labels.insert(id, label.unwrap_or(FALLBACK_LABEL).to_string());
    }
    Ok(out)
}
