//! Reply parsing for generation prompts. Replies are expected inside a
//! fenced block with one item per line; prose around the block is ignored.

use std::sync::OnceLock;

use regex::Regex;

use crate::error::{Error, Result};

fn fence_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?s)```[^\n`]*\n(.*?)```").unwrap())
}

fn bullet_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*(?:[-*•]\s+|\d+[.)]\s+)").unwrap())
}

/// Contents of every fenced block, in order.
pub fn fenced_blocks(text: &str) -> Vec<&str> {
    fence_re()
        .captures_iter(text)
        .map(|c| c.get(1).unwrap().as_str())
        .collect()
}

/// Non-empty lines of the first fenced block (or of the whole reply when it
/// has no fence), with list markers stripped.
pub fn reply_items(reply: &str) -> Result<Vec<String>> {
    let body = fenced_blocks(reply).into_iter().next().unwrap_or(reply);
    let items: Vec<String> = body
        .lines()
        .map(|l| bullet_re().replace(l, "").trim().to_string())
        .filter(|l| !l.is_empty() && !l.starts_with("```"))
        .collect();
    if items.is_empty() {
        return Err(Error::Reply(format!("no items in reply {:?}", truncate(reply, 80))));
    }
    Ok(items)
}

pub fn first_item(reply: &str) -> Result<String> {
    reply_items(reply).map(|mut v| v.swap_remove(0))
}

fn truncate(s: &str, n: usize) -> String {
    s.chars().take(n).collect()
}
