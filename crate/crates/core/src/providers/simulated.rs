//! A deterministic chat model that understands the built-in prompt
//! templates well enough to drive the whole pipeline offline.
//!
//! Replies are pure functions of the prompt. Roughly one positive in ten
//! gets an off-topic query (so the judge filter has something to remove),
//! and roughly one hard negative in five keeps the query's key terms (so
//! label correction finds false negatives).

use std::collections::HashSet;

use super::mock::stable_hash;
use super::{ChatParams, ChatProvider};
use crate::error::{ProviderError, Result};
use crate::generator::parse::fenced_blocks;
use crate::tokenize::{terms, WordPunctTokenizer};

const PERSONAS: [&str; 8] = [
    "a graduate student",
    "a software engineer",
    "a science journalist",
    "a high school teacher",
    "a retired nurse",
    "a product manager",
    "a curious traveler",
    "a policy analyst",
];

const STOPWORDS: [&str; 42] = [
    "evidence", "shows", "about", "above", "after", "again", "also", "been", "being", "below", "between", "both",
    "could", "does", "doing", "each", "from", "further", "have", "having", "here", "into", "more", "most", "only",
    "other", "over", "same", "should", "some", "such", "than", "that", "their", "them", "then", "there", "these",
    "they", "this", "those", "with",
];

const OFF_TOPIC: [&str; 6] = ["weather", "forecast", "lottery", "recipes", "karaoke", "horoscope"];

const FILLER: [&str; 12] = [
    "general",
    "overview",
    "history",
    "context",
    "review",
    "summary",
    "notes",
    "background",
    "survey",
    "digest",
    "outline",
    "primer",
];

const STYLE_PREFIXES: [(&str, &str); 6] = [
    ("casual", "hey, quick one:"),
    ("informal", "so like,"),
    ("formal", "I would like to inquire:"),
    ("professional", "For a client briefing:"),
    (
        "complicated",
        "Considering the multifaceted interdependencies involved,",
    ),
    ("academic", "From a scholarly perspective,"),
];

const WH_WORDS: [&str; 7] = ["how", "what", "when", "where", "which", "who", "why"];
const AUXILIARIES: [&str; 12] = [
    "is", "are", "do", "does", "did", "can", "could", "should", "will", "would", "was", "has",
];

/// Terms a judge or query would treat as meaningful.
fn content_terms(text: &str) -> Vec<String> {
    let mut seen = HashSet::new();
    terms(text, &WordPunctTokenizer)
        .into_iter()
        .filter(|t| t.chars().count() > 3)
        .filter(|t| {
            ![&STOPWORDS[..], &WH_WORDS, &AUXILIARIES]
                .iter()
                .any(|l| l.contains(&t.as_str()))
        })
        .filter(|t| seen.insert(t.clone()))
        .collect()
}

fn strip_style(query: &str) -> &str {
    STYLE_PREFIXES
        .iter()
        .find_map(|(_, p)| query.strip_prefix(p).map(str::trim))
        .unwrap_or(query)
}

fn hash(parts: &[&str]) -> u64 {
    stable_hash(parts.join("\u{1f}").as_bytes())
}

fn fence(lines: &[String]) -> String {
    format!("```\n{}\n```", lines.join("\n"))
}

fn field<'p>(prompt: &'p str, label: &str) -> &'p str {
    prompt
        .lines()
        .find_map(|l| l.strip_prefix(label))
        .map(str::trim)
        .unwrap_or_default()
}

fn between<'p>(prompt: &'p str, start: &str, end: &str) -> &'p str {
    prompt
        .split_once(start)
        .and_then(|(_, rest)| rest.split_once(end))
        .map(|(mid, _)| mid.trim())
        .unwrap_or_default()
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SimulatedChat;

impl SimulatedChat {
    fn characters(&self, doc: &str) -> String {
        let h = hash(&[doc]) as usize;
        let n = 3 + h % 2;
        let picks: Vec<String> = (0..n)
            .map(|j| PERSONAS[(h / 7 + j * 3) % PERSONAS.len()].to_string())
            .collect();
        fence(&picks)
    }

    fn scenario(&self, character: &str, doc: &str) -> String {
        let words = content_terms(doc);
        let pick = |k: usize| words.get(k).map(String::as_str).unwrap_or("this topic");
        let h = hash(&[character, doc]) as usize;
        fence(&[format!(
            "{character} is preparing a short briefing on {} and {}",
            pick(h % words.len().max(1)),
            pick((h / 11) % words.len().max(1)),
        )])
    }

    fn query(&self, prompt: &str, doc: &str) -> String {
        let h = hash(&[prompt]) as usize;
        let query_type = between(prompt, "The query is a ", ".");
        let length = between(prompt, "The query has ", ".");
        let partial = prompt.contains("The query is based on partial");
        let target: usize = match length {
            "less than 5 words" => 3,
            "less than 10 words" => 7,
            "10 to 20 words" => 14,
            _ => 22,
        };
        let all = content_terms(doc);
        let off_topic = hash(&[doc]).is_multiple_of(10);
        // the document's first term anchors the query to it specifically
        let anchor = if off_topic { None } else { all.first().cloned() };
        let mut words: Vec<String> = if off_topic {
            OFF_TOPIC.iter().map(|s| s.to_string()).collect()
        } else {
            all.iter().skip(1).cloned().collect()
        };
        if partial && words.len() > 4 {
            words = words.split_off(words.len() / 2);
        }
        if words.is_empty() {
            words.push("topic".into());
        }
        let lead: Vec<&str> = match query_type {
            "problem" => vec!["how", "can", "I", "fix"],
            "claim" => vec!["evidence", "shows", "that"],
            _ => {
                let q = [
                    "what", "how", "why", "when", "where", "which", "who", "is", "does", "can",
                ];
                vec![q[h % q.len()]]
            }
        };
        let body_len = target.saturating_sub(lead.len()).max(1);
        let start = (h / 13) % words.len();
        let mut body: Vec<&str> = anchor.iter().map(String::as_str).collect();
        for k in body.len()..body_len {
            // connective words keep long queries readable without adding terms
            if k > 0 && k % 3 == 0 {
                body.push(if k % 2 == 0 { "and" } else { "the" });
            }
            body.push(&words[(start + k) % words.len()]);
        }
        body.truncate(body_len);
        let mut text = lead.iter().copied().chain(body).collect::<Vec<_>>().join(" ");
        if query_type != "claim" {
            text.push('?');
        }
        fence(&[text])
    }

    fn rewrite(&self, style: &str, query: &str) -> String {
        let stripped = strip_style(query);
        match STYLE_PREFIXES.iter().find(|(s, _)| *s == style) {
            Some((_, prefix)) => fence(&[format!("{prefix} {stripped}")]),
            None => fence(&[stripped.to_string()]),
        }
    }

    fn hard_negatives(&self, count: usize, query: &str, doc: &str) -> String {
        let key: HashSet<String> = content_terms(query).into_iter().collect();
        let doc_terms = terms(doc, &WordPunctTokenizer);
        let lines: Vec<String> = (0..count)
            .map(|j| {
                let h = hash(&[query, doc, &j.to_string()]) as usize;
                let keep_key = h.is_multiple_of(5);
                let rotate = 1 + (h / 5) % doc_terms.len().max(1);
                let mut words: Vec<&str> = doc_terms
                    .iter()
                    .enumerate()
                    .map(|(i, t)| {
                        if !keep_key && key.contains(t) {
                            FILLER[(h + i) % FILLER.len()]
                        } else {
                            t.as_str()
                        }
                    })
                    .collect();
                let n = words.len();
                if n > 0 {
                    words.rotate_left(rotate % n);
                }
                format!("{} variant {j}", words.join(" "))
            })
            .collect();
        fence(&lines)
    }

    /// Share of the query's content terms found in the document, mapped onto
    /// the four judging levels.
    pub fn judge_level(query: &str, doc: &str) -> u8 {
        let q = content_terms(strip_style(query));
        if q.is_empty() {
            return 0;
        }
        let d: HashSet<String> = content_terms(doc).into_iter().collect();
        let share = q.iter().filter(|t| d.contains(*t)).count() as f64 / q.len() as f64;
        match share {
            s if s >= 1.0 => 3,
            s if s >= 0.9 => 2,
            s if s >= 0.4 => 1,
            _ => 0,
        }
    }

    fn label_type(&self, query: &str) -> String {
        let words = terms(strip_style(query), &WordPunctTokenizer);
        match words.first().map(String::as_str) {
            Some(w) if WH_WORDS.contains(&w) => w.to_string(),
            Some(w) if AUXILIARIES.contains(&w) => "yes-no".into(),
            Some("evidence") => "claim".into(),
            _ => "others".into(),
        }
    }

    fn label_style(&self, query: &str) -> String {
        STYLE_PREFIXES
            .iter()
            .find(|(_, p)| query.starts_with(p))
            .map(|(s, _)| s.to_string())
            .unwrap_or_else(|| "concise".into())
    }
}

impl ChatProvider for SimulatedChat {
    fn complete(&self, prompt: &str, _: &ChatParams) -> Result<String> {
        let blocks = fenced_blocks(prompt);
        let block = |i: usize| blocks.get(i).map(|b| b.trim()).unwrap_or_default();
        let reply = if prompt.contains("list the characters who might find this document useful") {
            self.characters(block(0))
        } else if prompt.contains("Describe one scenario in which") {
            self.scenario(field(prompt, "Character:"), block(0))
        } else if prompt.contains("Write a search query") {
            self.query(prompt, block(0))
        } else if prompt.contains("Rewrite the query below in a") {
            self.rewrite(between(prompt, "Rewrite the query below in a ", " style"), block(0))
        } else if prompt.contains("new documents that look relevant") {
            let count = between(prompt, "Write exactly ", " new documents").parse().unwrap_or(0);
            self.hard_negatives(count, block(0), block(1))
        } else if prompt.contains("judge whether the document is relevant") {
            Self::judge_level(block(0), block(1)).to_string()
        } else if prompt.contains("Select the most suitable type") {
            self.label_type(block(0))
        } else if prompt.contains("Select the most suitable expression style") {
            self.label_style(block(0))
        } else {
            return Err(ProviderError::Contract("simulated chat does not recognize this prompt".into()).into());
        };
        Ok(reply)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::TemplateSet;

    fn first(reply: &str) -> String {
        crate::generator::parse::first_item(reply).unwrap()
    }

    const DOC: &str = "Photosynthesis converts sunlight into chemical energy. Chlorophyll molecules \
                       absorb light while enzymes assemble glucose from carbon dioxide and water.";

    fn ask(name: &str, vars: &[(&str, &str)]) -> String {
        let prompt = TemplateSet::builtin().render(name, vars).unwrap();
        SimulatedChat.complete(&prompt, &ChatParams::GENERATION).unwrap()
    }

    #[test]
    fn answers_every_builtin_template() {
        let chars = ask("characters", &[("document", DOC)]);
        assert!(chars.starts_with("```"));
        let scenario = ask("scenario", &[("document", DOC), ("character", "a nurse")]);
        assert!(first(&scenario).starts_with("a nurse"));
        let judge = ask("judge", &[("query", "chlorophyll sunlight glucose"), ("doc", DOC)]);
        assert_eq!(judge, "3");
        let judge = ask("judge", &[("query", "karaoke lottery"), ("doc", DOC)]);
        assert_eq!(judge, "0");
        assert_eq!(ask("label_type", &[("query", "why is chlorophyll green?")]), "why");
        assert_eq!(ask("label_type", &[("query", "so like, does it work?")]), "yes-no");
        assert_eq!(ask("label_style", &[("query", "so like, does it work?")]), "informal");
    }

    #[test]
    fn query_respects_length_and_type() {
        let prompt = |len: &str, ty: &str| {
            TemplateSet::builtin()
                .render(
                    "query",
                    &[
                        ("document", DOC),
                        ("character", "a nurse"),
                        ("scenario", "s"),
                        ("query_type", ty),
                        ("length", len),
                        ("info_type", "the overall information in the document"),
                    ],
                )
                .unwrap()
        };
        let short = first(
            &SimulatedChat
                .complete(&prompt("less than 5 words", "question"), &ChatParams::GENERATION)
                .unwrap(),
        );
        assert!(short.split_whitespace().count() < 5, "{short}");
        let claim = first(
            &SimulatedChat
                .complete(&prompt("10 to 20 words", "claim"), &ChatParams::GENERATION)
                .unwrap(),
        );
        let n = claim.split_whitespace().count();
        assert!((10..=20).contains(&n), "{claim}");
        assert!(claim.starts_with("evidence shows that"));
    }

    #[test]
    fn hard_negatives_differ_from_positive() {
        let reply = ask(
            "hard_negatives",
            &[
                ("count", "5"),
                ("query", "how does chlorophyll absorb light?"),
                ("document", DOC),
            ],
        );
        let lines = crate::generator::parse::reply_items(&reply).unwrap();
        assert_eq!(lines.len(), 5);
        assert!(lines.iter().all(|l| l != DOC));
        assert_eq!(lines.iter().collect::<HashSet<_>>().len(), 5);
    }

    #[test]
    fn unknown_prompt_is_a_contract_error() {
        assert!(SimulatedChat.complete("hello", &ChatParams::GENERATION).is_err());
    }
}
