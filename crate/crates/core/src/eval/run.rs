//! Six-column TREC run files: `query_id Q0 doc_id rank score tag`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::RankedList;

/// Reads a run file. Entries are re-sorted by score (descending, ties by doc
/// id); the rank column is informational. Query order follows first
/// appearance in the file.
pub fn read_run(path: impl AsRef<Path>) -> Result<Vec<RankedList>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    parse_run(&text, path)
}

pub fn parse_run(text: &str, path: &Path) -> Result<Vec<RankedList>> {
    let mut order: Vec<String> = Vec::new();
    let mut entries: BTreeMap<String, Vec<(String, f64)>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 6 {
            return Err(err(format!("expected 6 columns, found {}", cols.len())));
        }
        cols[3]
            .parse::<usize>()
            .map_err(|_| err(format!("rank `{}` is not an integer", cols[3])))?;
        let score: f64 = cols[4]
            .parse()
            .ok()
            .filter(|s: &f64| s.is_finite())
            .ok_or_else(|| err(format!("score `{}` is not a finite number", cols[4])))?;
        let q = cols[0].to_string();
        if !entries.contains_key(&q) {
            order.push(q.clone());
        }
        entries.entry(q).or_default().push((cols[2].to_string(), score));
    }
    Ok(order
        .into_iter()
        .map(|q| {
            let scored = entries.remove(&q).unwrap_or_default();
            RankedList::from_scores(q, scored)
        })
        .collect())
}

pub fn format_run(lists: &[RankedList], tag: &str) -> String {
    let mut out = String::new();
    for list in lists {
        for (rank, (doc, score)) in list.entries.iter().enumerate() {
            writeln!(out, "{} Q0 {} {} {} {}", list.query_id, doc, rank + 1, score, tag).unwrap();
        }
    }
    out
}

pub fn write_run(lists: &[RankedList], tag: &str, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if tag.split_whitespace().count() != 1 {
        return Err(Error::config(format!("run tag `{tag}` must be a single word")));
    }
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(format!("creating {}", parent.display()), e))?;
    }
    std::fs::write(path, format_run(lists, tag)).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}
