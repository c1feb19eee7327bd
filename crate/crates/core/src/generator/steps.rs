//! The individual prompting steps of one generation iteration.

use std::collections::HashSet;

use rand::Rng;

use super::attributes::sample_hard_negative_count;
use super::config::GenerationConfig;
use super::parse::{first_item, reply_items};
use super::templates::TemplateSet;
use crate::error::{Error, Result};
use crate::providers::{ChatParams, ChatProvider};
use crate::tokenize::{jaccard_overlap, Tokenizer};
use crate::types::{Document, Origin, QueryAttributes, Style, Task, META_QUERY_ID};

/// Everything a prompting step needs besides its own inputs.
#[derive(Clone, Copy)]
pub struct GenContext<'a> {
    pub chat: &'a dyn ChatProvider,
    pub templates: &'a TemplateSet,
    pub tokenizer: &'a dyn Tokenizer,
    pub params: ChatParams,
}

impl<'a> GenContext<'a> {
    fn ask(&self, template: &str, vars: &[(&str, &str)]) -> Result<String> {
        let prompt = self.templates.render(template, vars)?;
        self.chat.complete(&prompt, &self.params)
    }
}

pub fn generate_characters(doc: &Document, ctx: &GenContext<'_>) -> Result<Vec<String>> {
    if doc.text.trim().is_empty() {
        return Err(Error::Precondition(format!("document `{}` is empty", doc.id)));
    }
    reply_items(&ctx.ask("characters", &[("document", &doc.text)])?)
}

pub fn generate_scenario(doc: &Document, character: &str, ctx: &GenContext<'_>) -> Result<String> {
    first_item(&ctx.ask("scenario", &[("document", &doc.text), ("character", character)])?)
}

pub fn generate_query(
    doc: &Document,
    character: &str,
    scenario: &str,
    attrs: &QueryAttributes,
    task: Task,
    ctx: &GenContext<'_>,
) -> Result<String> {
    attrs.validate_for(task)?;
    first_item(&ctx.ask(
        "query",
        &[
            ("document", &doc.text),
            ("character", character),
            ("scenario", scenario),
            ("query_type", attrs.query_type.phrase()),
            ("length", attrs.length_bucket.phrase()),
            ("info_type", attrs.info_type.phrase()),
        ],
    )?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RewriteOutcome {
    pub text: String,
    /// Starts with the input query and ends with `text`.
    pub history: Vec<String>,
    /// Term-set overlap between `text` and the positive document.
    pub overlap: f64,
    /// Every rewrite came back empty, so the input query was kept.
    pub fell_back: bool,
}

/// Rewrites the query in `style` until its term overlap with the positive
/// document drops below the threshold or the iteration budget runs out.
/// Each round rewrites the previous round's output.
pub fn rewrite_query(
    query: &str,
    positive: &Document,
    style: Style,
    max_iters: usize,
    threshold: f64,
    ctx: &GenContext<'_>,
) -> Result<RewriteOutcome> {
    if query.trim().is_empty() {
        return Err(Error::Precondition("cannot rewrite an empty query".into()));
    }
    let mut history = vec![query.to_string()];
    let mut current: Option<(String, f64)> = None;
    for _ in 0..max_iters {
        let source = current.as_ref().map_or(query, |(t, _)| t.as_str());
        let reply = ctx.ask(
            "rewrite",
            &[
                ("query", source),
                ("document", &positive.text),
                ("style", style.phrase()),
            ],
        )?;
        let candidate = match first_item(&reply) {
            Ok(c) => c,
            Err(Error::Reply(_)) => continue,
            Err(e) => return Err(e),
        };
        let overlap = jaccard_overlap(&candidate, &positive.text, ctx.tokenizer);
        history.push(candidate.clone());
        current = Some((candidate, overlap));
        if overlap < threshold || threshold >= 1.0 {
            break;
        }
    }
    Ok(match current {
        Some((text, overlap)) => RewriteOutcome {
            text,
            history,
            overlap,
            fell_back: false,
        },
        None => {
            tracing::warn!(query, "all rewrites were empty; keeping the original query");
            RewriteOutcome {
                overlap: jaccard_overlap(query, &positive.text, ctx.tokenizer),
                text: query.to_string(),
                history,
                fell_back: true,
            }
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HardNegatives {
    pub requested: usize,
    pub docs: Vec<Document>,
}

impl HardNegatives {
    pub fn shortfall(&self) -> usize {
        self.requested - self.docs.len()
    }
}

/// Requests `count` hard negatives and keeps the distinct ones that differ
/// from the positive. Ids are `<query-id>-hn-<j>`.
pub fn request_hard_negatives(
    query_id: &str,
    query: &str,
    positive: &Document,
    count: usize,
    ctx: &GenContext<'_>,
) -> Result<HardNegatives> {
    if count == 0 {
        return Ok(HardNegatives {
            requested: 0,
            docs: Vec::new(),
        });
    }
    let reply = ctx.ask(
        "hard_negatives",
        &[
            ("query", query),
            ("document", &positive.text),
            ("count", &count.to_string()),
        ],
    )?;
    let items = match reply_items(&reply) {
        Ok(items) => items,
        Err(Error::Reply(_)) => Vec::new(),
        Err(e) => return Err(e),
    };
    let mut seen = HashSet::new();
    let docs: Vec<Document> = items
        .into_iter()
        .filter(|t| t.trim() != positive.text.trim() && seen.insert(t.clone()))
        .take(count)
        .enumerate()
        .map(|(j, text)| {
            Document::new(format!("{query_id}-hn-{j}"), text)
                .with_origin(Origin::HardNegative)
                .with_meta(META_QUERY_ID, query_id)
        })
        .collect();
    if docs.len() < count {
        tracing::warn!(query_id, requested = count, got = docs.len(), "hard negative shortfall");
    }
    Ok(HardNegatives { requested: count, docs })
}

/// Draws the hard-negative count from the configured range and requests
/// that many. Long-document configs always yield none.
pub fn generate_hard_negatives<R: Rng + ?Sized>(
    query_id: &str,
    query: &str,
    positive: &Document,
    config: &GenerationConfig,
    rng: &mut R,
    ctx: &GenContext<'_>,
) -> Result<HardNegatives> {
    let count = sample_hard_negative_count(config, rng);
    request_hard_negatives(query_id, query, positive, count, ctx)
}
