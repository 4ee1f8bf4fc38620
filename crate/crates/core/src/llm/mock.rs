use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use super::{CompletionProvider, CompletionRequest, CompletionResult, LlmError};

/// One scripted reply: fires when `pattern` is a substring of the user text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockRule {
    pub pattern: String,
    pub response: String,
}

/// Ordered rules plus a default. The first matching rule wins.
///
/// Responses are templates. `{{user_text}}` expands to the whole user text and
/// `{{after:MARKER}}` to the rest of the line following the first occurrence of
/// `MARKER` (empty when the marker is absent). Anything else is literal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockScript {
    #[serde(default)]
    pub rules: Vec<MockRule>,
    pub default_response: String,
}

impl MockScript {
    pub fn new(default_response: impl Into<String>) -> Self {
        MockScript {
            rules: Vec::new(),
            default_response: default_response.into(),
        }
    }

    pub fn rule(mut self, pattern: impl Into<String>, response: impl Into<String>) -> Self {
        self.rules.push(MockRule {
            pattern: pattern.into(),
            response: response.into(),
        });
        self
    }

    /// Echoes the user text back.
    pub fn echo() -> Self {
        Self::new("{{user_text}}")
    }

    pub fn from_toml_str(s: &str) -> Result<Self, LlmError> {
        toml::from_str(s).map_err(|e| LlmError::Script(e.to_string()))
    }

    /// Loads a `.json` or TOML script file.
    pub fn load(path: &Path) -> Result<Self, LlmError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LlmError::Script(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text)
                .map_err(|e| LlmError::Script(format!("{}: {e}", path.display())))
        } else {
            Self::from_toml_str(&text)
                .map_err(|e| LlmError::Script(format!("{}: {e}", path.display())))
        }
    }

    pub fn respond(&self, user_text: &str) -> String {
        let template = self
            .rules
            .iter()
            .find(|r| user_text.contains(&r.pattern))
            .map(|r| r.response.as_str())
            .unwrap_or(&self.default_response);
        render(template, user_text)
    }
}

fn render(template: &str, user_text: &str) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(start) = rest.find("{{") {
        out.push_str(&rest[..start]);
        let after_open = &rest[start + 2..];
        let Some(end) = after_open.find("}}") else {
            out.push_str(&rest[start..]);
            return out;
        };
        let tag = &after_open[..end];
        if tag == "user_text" {
            out.push_str(user_text);
        } else if let Some(marker) = tag.strip_prefix("after:") {
            if let Some(pos) = user_text.find(marker) {
                let tail = &user_text[pos + marker.len()..];
                out.push_str(tail.lines().next().unwrap_or("").trim());
            }
        } else {
            out.push_str(&rest[start..start + 2 + end + 2]);
        }
        rest = &after_open[end + 2..];
    }
    out.push_str(rest);
    out
}

/// Deterministic provider driven by a [`MockScript`].
#[derive(Debug)]
pub struct MockProvider {
    name: String,
    script: MockScript,
    calls: AtomicUsize,
}

impl MockProvider {
    pub fn new(script: MockScript) -> Self {
        MockProvider {
            name: "mock".into(),
            script,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn script(&self) -> &MockScript {
        &self.script
    }

    /// Number of completions served so far.
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl CompletionProvider for MockProvider {
    fn name(&self) -> &str {
        &self.name
    }

    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResult, LlmError> {
        request.validate()?;
        self.calls.fetch_add(1, Ordering::SeqCst);
        Ok(CompletionResult {
            text: self.script.respond(&request.user_text),
            provider_name: self.name.clone(),
            cached: false,
            latency_ms: 0,
        })
    }
}
