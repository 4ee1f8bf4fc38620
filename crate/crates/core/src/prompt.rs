use serde::{Deserialize, Serialize};

/// The zero-shot chain-of-thought instruction used as the generic baseline.
pub const GENERIC_PROMPT: &str = "Let's think step by step.";

/// A candidate instruction plus its lineage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub id: String,
    pub text: String,
    pub generation: u32,
    pub parent_id: Option<String>,
    pub mutation_note: Option<String>,
}

impl Prompt {
    /// A generation-0 prompt with no parent.
    pub fn seed(id: impl Into<String>, text: impl Into<String>) -> Self {
        Prompt {
            id: id.into(),
            text: text.into(),
            generation: 0,
            parent_id: None,
            mutation_note: None,
        }
    }

    pub fn child_of(
        parent: &Prompt,
        id: impl Into<String>,
        text: impl Into<String>,
        note: impl Into<String>,
    ) -> Self {
        Prompt {
            id: id.into(),
            text: text.into(),
            generation: parent.generation + 1,
            parent_id: Some(parent.id.clone()),
            mutation_note: Some(note.into()),
        }
    }
}

/// The user text sent for one dataset question: instruction, blank line, question.
pub fn compose_query(prompt_text: &str, question: &str) -> String {
    format!("{prompt_text}\n\n{question}")
}
