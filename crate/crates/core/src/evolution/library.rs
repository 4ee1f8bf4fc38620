use std::collections::HashSet;
use std::path::Path;

use super::EvolutionError;

const DEFAULT_LIBRARY: &str = include_str!("../../assets/strategies.txt");

/// Thinking styles for initialization and strategies for mutation.
///
/// Text form: entries one per line under `[thinking_styles]` and
/// `[mutation_strategies]` headers; blank lines and `#` comments are ignored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyLibrary {
    thinking_styles: Vec<String>,
    mutation_strategies: Vec<String>,
}

impl StrategyLibrary {
    pub fn new(
        thinking_styles: Vec<String>,
        mutation_strategies: Vec<String>,
    ) -> Result<Self, EvolutionError> {
        for (name, list) in [
            ("thinking_styles", &thinking_styles),
            ("mutation_strategies", &mutation_strategies),
        ] {
            if list.is_empty() {
                return Err(EvolutionError::InvalidLibrary(format!("{name} is empty")));
            }
            let mut seen = HashSet::new();
            for entry in list {
                if entry.trim().is_empty() {
                    return Err(EvolutionError::InvalidLibrary(format!("{name} has a blank entry")));
                }
                if !seen.insert(entry.as_str()) {
                    return Err(EvolutionError::InvalidLibrary(format!(
                        "{name} lists {entry:?} twice"
                    )));
                }
            }
        }
        Ok(StrategyLibrary {
            thinking_styles,
            mutation_strategies,
        })
    }

    pub fn parse(text: &str) -> Result<Self, EvolutionError> {
        let mut styles = Vec::new();
        let mut strategies = Vec::new();
        let mut current: Option<&mut Vec<String>> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line {
                "[thinking_styles]" => current = Some(&mut styles),
                "[mutation_strategies]" => current = Some(&mut strategies),
                _ if line.starts_with('[') && line.ends_with(']') => {
                    return Err(EvolutionError::InvalidLibrary(format!(
                        "line {}: unknown section {line}",
                        i + 1
                    )))
                }
                _ => match current.as_deref_mut() {
                    Some(list) => list.push(line.to_string()),
                    None => {
                        return Err(EvolutionError::InvalidLibrary(format!(
                            "line {}: entry outside of a section",
                            i + 1
                        )))
                    }
                },
            }
        }
        Self::new(styles, strategies)
    }

    pub fn load(path: &Path) -> Result<Self, EvolutionError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| EvolutionError::InvalidLibrary(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn thinking_styles(&self) -> &[String] {
        &self.thinking_styles
    }

    pub fn mutation_strategies(&self) -> &[String] {
        &self.mutation_strategies
    }
}

impl Default for StrategyLibrary {
    fn default() -> Self {
        Self::parse(DEFAULT_LIBRARY).expect("bundled strategy library is valid")
    }
}
