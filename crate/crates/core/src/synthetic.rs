//! Seeded toy corpora for examples, tests, and smoke runs.
//!
//! Documents are sentences drawn from a handful of topic vocabularies, so
//! documents on the same topic share terms and lexical retrieval has
//! something to find.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::types::Document;

pub const TOPICS: [(&str, &[&str]); 8] = [
    (
        "astronomy",
        &[
            "telescope",
            "galaxy",
            "nebula",
            "orbit",
            "comet",
            "asteroid",
            "planet",
            "stellar",
            "redshift",
            "eclipse",
            "quasar",
            "satellite",
            "meteor",
            "supernova",
            "cosmic",
            "gravity",
            "lunar",
            "solar",
            "pulsar",
            "spectrum",
        ],
    ),
    (
        "cooking",
        &[
            "saucepan", "simmer", "garlic", "butter", "recipe", "oven", "roast", "flour", "yeast", "dough", "pepper",
            "braise", "skillet", "marinade", "vinegar", "caramel", "pastry", "broth", "knead", "herbs",
        ],
    ),
    (
        "finance",
        &[
            "interest",
            "mortgage",
            "equity",
            "dividend",
            "inflation",
            "bond",
            "portfolio",
            "budget",
            "credit",
            "liquidity",
            "pension",
            "market",
            "currency",
            "audit",
            "ledger",
            "tariff",
            "revenue",
            "savings",
            "loan",
            "yield",
        ],
    ),
    (
        "gardening",
        &[
            "compost",
            "seedling",
            "mulch",
            "pruning",
            "perennial",
            "soil",
            "irrigation",
            "greenhouse",
            "tomato",
            "fertilizer",
            "weeds",
            "orchard",
            "bulbs",
            "trellis",
            "harvest",
            "roots",
            "blossom",
            "shrub",
            "shade",
            "watering",
        ],
    ),
    (
        "medicine",
        &[
            "vaccine",
            "antibody",
            "symptom",
            "diagnosis",
            "clinic",
            "dosage",
            "infection",
            "therapy",
            "surgeon",
            "allergy",
            "immune",
            "patient",
            "fever",
            "prescription",
            "cardiac",
            "insulin",
            "virus",
            "chronic",
            "recovery",
            "nurse",
        ],
    ),
    (
        "computing",
        &[
            "compiler",
            "kernel",
            "database",
            "network",
            "algorithm",
            "memory",
            "processor",
            "software",
            "server",
            "encryption",
            "protocol",
            "latency",
            "cache",
            "thread",
            "bandwidth",
            "router",
            "debugging",
            "storage",
            "firmware",
            "cluster",
        ],
    ),
    (
        "history",
        &[
            "empire",
            "dynasty",
            "treaty",
            "medieval",
            "revolution",
            "monarchy",
            "archive",
            "colonial",
            "parliament",
            "conquest",
            "ancient",
            "pharaoh",
            "crusade",
            "renaissance",
            "senate",
            "feudal",
            "artifact",
            "chronicle",
            "siege",
            "republic",
        ],
    ),
    (
        "sports",
        &[
            "marathon",
            "stadium",
            "referee",
            "tournament",
            "goalkeeper",
            "sprint",
            "coach",
            "league",
            "penalty",
            "championship",
            "athlete",
            "training",
            "dribble",
            "racket",
            "medal",
            "innings",
            "tackle",
            "relay",
            "umpire",
            "season",
        ],
    ),
];

const SYLLABLES: [&str; 16] = [
    "ka", "lor", "vin", "dra", "mes", "tul", "qua", "rho", "zen", "bar", "tik", "oso", "pel", "gur", "nix", "wal",
];

/// A made-up proper name, so each document has a term of its own.
fn entity(rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(3..=4);
    let mut name: String = (0..n).map(|_| *SYLLABLES.choose(rng).unwrap()).collect();
    name[..1].make_ascii_uppercase();
    name
}

const CONNECTIVES: [&str; 12] = [
    "the", "a", "and", "of", "in", "with", "for", "to", "on", "by", "from", "about",
];

fn sentence(rng: &mut ChaCha8Rng, vocab: &[&str], words: usize) -> String {
    let mut out: Vec<&str> = Vec::with_capacity(words);
    for i in 0..words {
        if i % 3 == 1 {
            out.push(CONNECTIVES.choose(rng).unwrap());
        } else {
            out.push(vocab.choose(rng).unwrap());
        }
    }
    let mut s = out.join(" ");
    if let Some(first) = s.get_mut(0..1) {
        first.make_ascii_uppercase();
    }
    s.push('.');
    s
}

/// `n` documents of roughly 40 to 120 tokens, ids `synth-<i>`. Each opens
/// with a made-up name that rarely recurs elsewhere in the corpus.
pub fn synthetic_corpus(n: usize, seed: u64) -> Vec<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let (topic, vocab) = TOPICS[rng.gen_range(0..TOPICS.len())];
            let target = rng.gen_range(40..=120);
            let name = entity(&mut rng);
            let mut text = format!("{name}.");
            let mut tokens = 2;
            while tokens < target {
                let len = rng.gen_range(6..=14);
                text.push(' ');
                text.push_str(&sentence(&mut rng, vocab, len));
                tokens += len + 1;
            }
            Document::new(format!("synth-{i}"), text).with_title(topic)
        })
        .collect()
}

/// One long text of about `tokens` tokens spanning several topics.
pub fn synthetic_long_text(tokens: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parts = Vec::new();
    let mut count = 0;
    while count < tokens {
        let (_, vocab) = TOPICS[(count / 300) % TOPICS.len()];
        let len = rng.gen_range(6..=14);
        parts.push(sentence(&mut rng, vocab, len));
        count += len + 1;
    }
    parts.join(" ")
}
