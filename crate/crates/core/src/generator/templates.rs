//! Versioned prompt templates with `{{placeholder}}` slots.
//!
//! The default set is compiled in; a directory with the same layout (a
//! `manifest.json` naming one file per template) can replace it at run time.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

pub const TEMPLATE_NAMES: [&str; 8] = [
    "characters",
    "scenario",
    "query",
    "rewrite",
    "hard_negatives",
    "judge",
    "label_type",
    "label_style",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    name: String,
    body: String,
}

impl Template {
    pub fn new(name: impl Into<String>, body: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            body: body.into(),
        }
    }

    pub fn body(&self) -> &str {
        &self.body
    }

    /// Placeholder names in order of first appearance.
    pub fn placeholders(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        let mut rest = self.body.as_str();
        while let Some(start) = rest.find("{{") {
            let after = &rest[start + 2..];
            let Some(end) = after.find("}}") else { break };
            let name = after[..end].trim();
            if !out.contains(&name) {
                out.push(name);
            }
            rest = &after[end + 2..];
        }
        out
    }

    /// Substitutes every placeholder in a single pass; values are inserted
    /// verbatim and never re-scanned.
    pub fn render(&self, vars: &[(&str, &str)]) -> Result<String> {
        let mut out = String::with_capacity(self.body.len() + vars.iter().map(|(_, v)| v.len()).sum::<usize>());
        let mut rest = self.body.as_str();
        while let Some(start) = rest.find("{{") {
            let after = &rest[start + 2..];
            let Some(end) = after.find("}}") else { break };
            let name = after[..end].trim();
            let value = vars
                .iter()
                .find(|(k, _)| *k == name)
                .map(|(_, v)| *v)
                .ok_or_else(|| Error::config(format!("template `{}` needs a value for `{name}`", self.name)))?;
            out.push_str(&rest[..start]);
            out.push_str(value);
            rest = &after[end + 2..];
        }
        out.push_str(rest);
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    pub version: String,
    templates: BTreeMap<String, Template>,
}

#[derive(Deserialize)]
struct Manifest {
    version: String,
    templates: BTreeMap<String, String>,
}

const BUILTIN_MANIFEST: &str = include_str!("../../templates/manifest.json");

fn builtin_body(file: &str) -> Option<&'static str> {
    Some(match file {
        "characters.txt" => include_str!("../../templates/characters.txt"),
        "scenario.txt" => include_str!("../../templates/scenario.txt"),
        "query.txt" => include_str!("../../templates/query.txt"),
        "rewrite.txt" => include_str!("../../templates/rewrite.txt"),
        "hard_negatives.txt" => include_str!("../../templates/hard_negatives.txt"),
        "judge.txt" => include_str!("../../templates/judge.txt"),
        "label_type.txt" => include_str!("../../templates/label_type.txt"),
        "label_style.txt" => include_str!("../../templates/label_style.txt"),
        _ => return None,
    })
}

impl TemplateSet {
    pub fn builtin() -> Self {
        Self::from_manifest(BUILTIN_MANIFEST, |file| {
            builtin_body(file)
                .map(str::to_string)
                .ok_or_else(|| Error::config(format!("no built-in template file `{file}`")))
        })
        .expect("built-in templates are complete")
    }

    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let manifest_path = dir.join("manifest.json");
        let manifest = std::fs::read_to_string(&manifest_path)
            .map_err(|e| Error::io(format!("reading {}", manifest_path.display()), e))?;
        Self::from_manifest(&manifest, |file| {
            let p = dir.join(file);
            std::fs::read_to_string(&p).map_err(|e| Error::io(format!("reading {}", p.display()), e))
        })
    }

    fn from_manifest(manifest: &str, read: impl Fn(&str) -> Result<String>) -> Result<Self> {
        let manifest: Manifest = serde_json::from_str(manifest)?;
        let mut templates = BTreeMap::new();
        for name in TEMPLATE_NAMES {
            let file = manifest
                .templates
                .get(name)
                .ok_or_else(|| Error::config(format!("template manifest lacks `{name}`")))?;
            templates.insert(name.to_string(), Template::new(name, read(file)?));
        }
        Ok(Self {
            version: manifest.version,
            templates,
        })
    }

    pub fn get(&self, name: &str) -> &Template {
        self.templates
            .get(name)
            .unwrap_or_else(|| panic!("unknown template `{name}`"))
    }

    pub fn render(&self, name: &str, vars: &[(&str, &str)]) -> Result<String> {
        self.get(name).render(vars)
    }
}

impl Default for TemplateSet {
    fn default() -> Self {
        Self::builtin()
    }
}
