//! Text templates for the four kinds of LLM requests the optimizer sends.
//!
//! Placeholders are `{name}` with a lowercase identifier; unknown names and
//! stray braces pass through untouched. Rendering is single-pass, so values
//! containing braces are never re-expanded.

use serde::{Deserialize, Serialize};

const CLASSIFICATION: &str = include_str!("../assets/classification.txt");
const SELECTION: &str = include_str!("../assets/selection.txt");
const INITIALIZATION: &str = include_str!("../assets/initialization.txt");
const MUTATION: &str = include_str!("../assets/mutation.txt");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Templates {
    /// Placeholders: `{examples}`, `{question}`, `{reference}`, `{labels}`.
    pub classification: String,
    /// Placeholders: `{task_type}`, `{examples}`, `{metrics}`.
    pub selection: String,
    /// Placeholders: `{style}`, `{task}`.
    pub initialization: String,
    /// Placeholders: `{strategy}`, `{parent}`.
    pub mutation: String,
}

impl Default for Templates {
    fn default() -> Self {
        Templates {
            classification: CLASSIFICATION.to_string(),
            selection: SELECTION.to_string(),
            initialization: INITIALIZATION.to_string(),
            mutation: MUTATION.to_string(),
        }
    }
}

impl Templates {
    /// Checks that each template mentions the placeholders it must fill.
    pub fn validate(&self) -> Result<(), String> {
        if !(self.classification.contains("{examples}") || self.classification.contains("{question}")) {
            return Err("classification template needs {examples} or {question}".into());
        }
        let required: [(&str, &str, &[&str]); 3] = [
            ("selection", &self.selection, &["{task_type}"]),
            ("initialization", &self.initialization, &["{style}", "{task}"]),
            ("mutation", &self.mutation, &["{strategy}", "{parent}"]),
        ];
        for (name, text, placeholders) in required {
            for p in placeholders {
                if !text.contains(p) {
                    return Err(format!("{name} template is missing {p}"));
                }
            }
        }
        Ok(())
    }
}

pub fn render(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let name_len = after
            .find(|c: char| !(c.is_ascii_lowercase() || c == '_'))
            .unwrap_or(after.len());
        let name = &after[..name_len];
        let closed = after[name_len..].starts_with('}');
        match vars.iter().find(|(k, _)| *k == name) {
            Some((_, value)) if closed && !name.is_empty() => {
                out.push_str(value);
                rest = &after[name_len + 1..];
            }
            _ => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}
