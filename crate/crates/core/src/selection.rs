//! Task classification and metric-plan selection.
//!
//! Both steps ask the LLM first and fall back to deterministic rules whenever
//! the provider fails or its answer does not parse, so they never fail.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::harness::DatasetItem;
use crate::llm::{CompletionProvider, RequestSettings};
use crate::metrics::{normalize_weights, MetricError, MetricKind, MetricPlan};
use crate::templates::{render, Templates};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskType {
    ArithmeticReasoning,
    MultiStepReasoning,
    LanguageUnderstanding,
    CreativeGeneration,
    RealWorldProblem,
    Unknown,
}

impl TaskType {
    pub const ALL: [TaskType; 6] = [
        TaskType::ArithmeticReasoning,
        TaskType::MultiStepReasoning,
        TaskType::LanguageUnderstanding,
        TaskType::CreativeGeneration,
        TaskType::RealWorldProblem,
        TaskType::Unknown,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskType::ArithmeticReasoning => "arithmetic_reasoning",
            TaskType::MultiStepReasoning => "multi_step_reasoning",
            TaskType::LanguageUnderstanding => "language_understanding",
            TaskType::CreativeGeneration => "creative_generation",
            TaskType::RealWorldProblem => "real_world_problem",
            TaskType::Unknown => "unknown",
        }
    }

    /// Lenient label parse; anything unrecognized is `Unknown`.
    pub fn parse_label(s: &str) -> TaskType {
        let norm: String = s
            .trim()
            .trim_matches(|c: char| !c.is_alphanumeric())
            .to_ascii_lowercase()
            .replace([' ', '-'], "_");
        TaskType::ALL
            .into_iter()
            .find(|t| t.as_str() == norm)
            .unwrap_or(TaskType::Unknown)
    }

    /// Default problem description used to seed the initial population.
    pub fn default_description(self) -> &'static str {
        match self {
            TaskType::ArithmeticReasoning => "Solve arithmetic word problems and state the numeric answer.",
            TaskType::MultiStepReasoning => "Solve multi-step reasoning problems and state the final answer.",
            TaskType::LanguageUnderstanding => "Analyze the given text carefully and answer the question about it.",
            TaskType::CreativeGeneration => "Write an original, engaging piece that fulfils the request.",
            TaskType::RealWorldProblem | TaskType::Unknown => "Answer the question helpfully and accurately.",
        }
    }
}

impl fmt::Display for TaskType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskType {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(TaskType::parse_label(s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileSource {
    Llm,
    Rules,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSample {
    pub question: String,
    pub reference: String,
}

impl From<&DatasetItem> for TaskSample {
    fn from(item: &DatasetItem) -> Self {
        TaskSample {
            question: item.question.clone(),
            reference: item.reference.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskProfile {
    pub task_type: TaskType,
    pub sample: TaskSample,
    pub source: ProfileSource,
}

const NUMBER_WORDS: &[&str] = &[
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
    "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen",
    "nineteen", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety",
    "hundred", "thousand", "million", "dozen", "half", "twice", "double", "triple",
];
const LANGUAGE_CUES: &[&str] = &["translat", "error", "grammar", "synonym", "antonym"];
const CREATIVE_CUES: &[&str] = &["story", "poem", "poetry", "haiku", "lyrics", "imagine"];

/// At most this many numbers and sentences still count as a single-step problem.
const SIMPLE_ARITHMETIC_LIMIT: usize = 3;

fn has_operator_expression(q: &str) -> bool {
    let chars: Vec<char> = q.chars().filter(|c| !c.is_whitespace()).collect();
    chars.windows(3).any(|w| {
        w[0].is_ascii_digit() && "+-*/×÷=^".contains(w[1]) && w[2].is_ascii_digit()
    })
}

fn number_mentions(q: &str) -> usize {
    q.split(|c: char| !c.is_alphanumeric() && c != '.')
        .map(|t| t.trim_matches('.').to_lowercase())
        .filter(|t| {
            (!t.is_empty() && t.chars().any(|c| c.is_ascii_digit()) && t.chars().all(|c| c.is_ascii_digit() || c == '.'))
                || NUMBER_WORDS.contains(&t.as_str())
        })
        .count()
}

fn sentence_count(q: &str) -> usize {
    q.split(['.', '?', '!'])
        .filter(|s| s.chars().any(char::is_alphanumeric))
        .count()
}

fn has_word(q: &str, word: &str) -> bool {
    q.split(|c: char| !c.is_alphanumeric())
        .any(|t| t == word)
}

/// Deterministic keyword classifier over the sample question, applied in
/// fixed priority order:
///
/// 1. an operator between digits, or at most three numbers in at most three
///    sentences: `arithmetic_reasoning`;
/// 2. the word "step", or numbers in a longer text: `multi_step_reasoning`;
/// 3. translation or error cues: `language_understanding`;
/// 4. story or poem cues: `creative_generation`;
/// 5. otherwise `real_world_problem`.
pub fn classify_task_rules(sample: &TaskSample) -> TaskType {
    let q = sample.question.to_lowercase();
    let numbers = number_mentions(&q);
    let sentences = sentence_count(&q);
    if has_operator_expression(&q)
        || (numbers > 0 && numbers <= SIMPLE_ARITHMETIC_LIMIT && sentences <= SIMPLE_ARITHMETIC_LIMIT)
    {
        return TaskType::ArithmeticReasoning;
    }
    if has_word(&q, "step") || has_word(&q, "steps") || numbers > 0 {
        return TaskType::MultiStepReasoning;
    }
    if LANGUAGE_CUES.iter().any(|c| q.contains(c)) {
        return TaskType::LanguageUnderstanding;
    }
    if CREATIVE_CUES.iter().any(|c| q.contains(c)) {
        return TaskType::CreativeGeneration;
    }
    TaskType::RealWorldProblem
}

fn render_examples(samples: &[TaskSample]) -> String {
    samples
        .iter()
        .enumerate()
        .map(|(i, s)| format!("Example {}:\nQuestion: {}\nAnswer: {}", i + 1, s.question, s.reference))
        .collect::<Vec<_>>()
        .join("\n\n")
}

/// Asks the LLM for a task label; falls back to [`classify_task_rules`] on any
/// provider error or unrecognized label. `samples` must be non-empty and the
/// first one becomes the profile's sample.
pub fn classify_task(
    samples: &[TaskSample],
    llm: &dyn CompletionProvider,
    settings: &RequestSettings,
    templates: &Templates,
) -> TaskProfile {
    let sample = samples[0].clone();
    let labels: Vec<&str> = TaskType::ALL[..5].iter().map(|t| t.as_str()).collect();
    let request = render(
        &templates.classification,
        &[
            ("examples", &render_examples(samples)),
            ("question", &sample.question),
            ("reference", &sample.reference),
            ("labels", &labels.join(", ")),
        ],
    );
    let from_llm = match settings.ask(llm, request) {
        Ok(answer) => {
            let first = answer.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
            match TaskType::parse_label(first) {
                TaskType::Unknown => {
                    log::info!("unrecognized task label {first:?}; using keyword rules");
                    None
                }
                t => Some(t),
            }
        }
        Err(e) => {
            log::warn!("task classification request failed: {e}; using keyword rules");
            None
        }
    };
    match from_llm {
        Some(task_type) => TaskProfile {
            task_type,
            sample,
            source: ProfileSource::Llm,
        },
        None => TaskProfile {
            task_type: classify_task_rules(&sample),
            sample,
            source: ProfileSource::Rules,
        },
    }
}

/// Raw fallback weights per task type, normalized when used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FallbackTable {
    table: BTreeMap<TaskType, BTreeMap<MetricKind, f64>>,
}

impl Default for FallbackTable {
    fn default() -> Self {
        use MetricKind::*;
        let reasoning = BTreeMap::from([(Similarity, 0.7), (Complexity, 0.3)]);
        let general = BTreeMap::from([
            (Similarity, 0.4),
            (Fluency, 0.2),
            (Diversity, 0.2),
            (Complexity, 0.2),
        ]);
        let table = BTreeMap::from([
            (TaskType::ArithmeticReasoning, reasoning.clone()),
            (TaskType::MultiStepReasoning, reasoning),
            (
                TaskType::CreativeGeneration,
                BTreeMap::from([(Diversity, 0.5), (Fluency, 0.3), (Similarity, 0.2)]),
            ),
            (
                TaskType::LanguageUnderstanding,
                BTreeMap::from([(Similarity, 0.6), (Fluency, 0.4)]),
            ),
            (TaskType::RealWorldProblem, general.clone()),
            (TaskType::Unknown, general),
        ]);
        FallbackTable { table }
    }
}

impl FallbackTable {
    /// Replaces the entries for the task types present in `overrides`.
    pub fn with_overrides(
        mut self,
        overrides: BTreeMap<TaskType, BTreeMap<MetricKind, f64>>,
    ) -> Result<Self, MetricError> {
        for (task, weights) in overrides {
            normalize_weights(weights.iter().map(|(k, w)| (*k, *w)))?;
            self.table.insert(task, weights);
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), MetricError> {
        for t in TaskType::ALL {
            self.plan_for(t)?;
        }
        Ok(())
    }

    pub fn plan_for(&self, task: TaskType) -> Result<MetricPlan, MetricError> {
        let weights = self
            .table
            .get(&task)
            .or_else(|| self.table.get(&TaskType::Unknown))
            .ok_or(MetricError::EmptyPlan)?;
        normalize_weights(weights.iter().map(|(k, w)| (*k, *w)))
    }
}

/// Parses `kind=weight` lines. Blank lines are ignored; anything else that does
/// not parse rejects the whole response.
pub fn parse_plan_response(text: &str) -> Result<MetricPlan, MetricError> {
    let mut raw = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (kind, weight) = line
            .split_once('=')
            .ok_or_else(|| MetricError::UnknownKind(line.to_string()))?;
        let kind: MetricKind = kind.trim().parse()?;
        let weight: f64 = weight
            .trim()
            .parse()
            .map_err(|_| MetricError::InvalidWeight { kind, weight: f64::NAN })?;
        raw.push((kind, weight));
    }
    normalize_weights(raw)
}

/// Asks the LLM for a weighted metric list; falls back to `fallback` for the
/// profile's task type on provider error or unparseable output.
pub fn select_metrics(
    profile: &TaskProfile,
    samples: &[TaskSample],
    llm: &dyn CompletionProvider,
    settings: &RequestSettings,
    templates: &Templates,
    fallback: &FallbackTable,
) -> MetricPlan {
    let metrics: Vec<&str> = MetricKind::ALL.iter().map(|k| k.as_str()).collect();
    let examples = if samples.is_empty() {
        render_examples(std::slice::from_ref(&profile.sample))
    } else {
        render_examples(samples)
    };
    let request = render(
        &templates.selection,
        &[
            ("task_type", profile.task_type.as_str()),
            ("examples", &examples),
            ("metrics", &metrics.join(", ")),
        ],
    );
    let parsed = settings
        .ask(llm, request)
        .map_err(MetricError::from)
        .and_then(|answer| parse_plan_response(&answer));
    match parsed {
        Ok(plan) => plan,
        Err(e) => {
            log::info!("metric selection fell back to the {} table: {e}", profile.task_type);
            fallback
                .plan_for(profile.task_type)
                .or_else(|_| FallbackTable::default().plan_for(profile.task_type))
                .unwrap_or_else(|_| MetricPlan::single(MetricKind::Similarity))
        }
    }
}
