use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::TemplateSet;
use crate::providers::{ChatParams, ChatProvider};

/// A four-level relevance judgment. Levels 2 and 3 count as relevant; level
/// 1 ("superficially relevant but actually not") does not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct RelevanceLevel(u8);

impl RelevanceLevel {
    pub fn new(level: u8) -> Result<Self> {
        if level > 3 {
            return Err(Error::Reply(format!("relevance level {level} is outside 0..=3")));
        }
        Ok(Self(level))
    }

    pub fn level(self) -> u8 {
        self.0
    }

    pub fn is_positive(self) -> bool {
        self.0 >= 2
    }
}

impl TryFrom<u8> for RelevanceLevel {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        Self::new(v)
    }
}

impl From<RelevanceLevel> for u8 {
    fn from(l: RelevanceLevel) -> u8 {
        l.0
    }
}

/// Accepts a reply that is exactly one digit 0-3, optionally followed by a
/// period.
pub fn parse_strict(reply: &str) -> Option<RelevanceLevel> {
    let t = reply.trim();
    let t = t.strip_suffix('.').unwrap_or(t);
    t.parse::<u8>().ok().and_then(|l| RelevanceLevel::new(l).ok())
}

/// The first standalone integer in the reply, if it is a valid level.
pub fn parse_lenient(reply: &str) -> Option<RelevanceLevel> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"\d+").unwrap());
    re.find(reply)
        .and_then(|m| m.as_str().parse::<u8>().ok())
        .and_then(|l| RelevanceLevel::new(l).ok())
}

#[derive(Clone, Copy)]
pub struct Judge<'a> {
    pub chat: &'a dyn ChatProvider,
    pub templates: &'a TemplateSet,
    pub params: ChatParams,
}

impl<'a> Judge<'a> {
    pub fn new(chat: &'a dyn ChatProvider, templates: &'a TemplateSet) -> Self {
        Self {
            chat,
            templates,
            params: ChatParams::JUDGING,
        }
    }

    /// Asks once; a malformed reply earns one re-ask, after which the first
    /// integer in the second reply is used if there is one.
    pub fn judge(&self, query: &str, doc: &str) -> Result<RelevanceLevel> {
        let prompt = self.templates.render("judge", &[("query", query), ("doc", doc)])?;
        let first = self.chat.complete(&prompt, &self.params)?;
        if let Some(level) = parse_strict(&first) {
            return Ok(level);
        }
        tracing::debug!(reply = %first, "malformed judgment; asking again");
        let second = self.chat.complete(&prompt, &self.params)?;
        parse_strict(&second)
            .or_else(|| parse_lenient(&second))
            .ok_or_else(|| Error::Reply(format!("no relevance level in {second:?}")))
    }
}

pub fn judge_relevance(query: &str, doc: &str, chat: &dyn ChatProvider) -> Result<RelevanceLevel> {
    Judge::new(chat, &TemplateSet::builtin()).judge(query, doc)
}
