use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::HarnessError;

/// Share of items used for fitness evaluation during evolution.
pub const DEFAULT_DEV_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetItem {
    pub id: String,
    pub question: String,
    pub reference: String,
}

/// Reads a JSON-lines dataset with `id`, `question` and `reference` fields.
///
/// Blank lines are skipped. Numeric ids are accepted and stringified.
pub fn load_dataset(path: &Path, limit: Option<usize>) -> Result<Vec<DatasetItem>, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_dataset(&text, path, limit)
}

pub fn parse_dataset(
    text: &str,
    path: &Path,
    limit: Option<usize>,
) -> Result<Vec<DatasetItem>, HarnessError> {
    let err = |line: usize, message: String| HarnessError::Dataset {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut items = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        if limit.is_some_and(|l| items.len() >= l) {
            break;
        }
        let value: Value =
            serde_json::from_str(raw).map_err(|e| err(line, format!("invalid JSON: {e}")))?;
        let field = |name: &str| -> Result<String, HarnessError> {
            match value.get(name) {
                Some(Value::String(s)) if !s.trim().is_empty() => Ok(s.clone()),
                Some(Value::Number(n)) => Ok(n.to_string()),
                Some(Value::String(_)) => Err(err(line, format!("field `{name}` is empty"))),
                Some(_) => Err(err(line, format!("field `{name}` must be a string"))),
                None => Err(err(line, format!("missing field `{name}`"))),
            }
        };
        let item = DatasetItem {
            id: field("id")?,
            question: field("question")?,
            reference: field("reference")?,
        };
        if !seen.insert(item.id.clone()) {
            return Err(err(line, format!("duplicate id `{}`", item.id)));
        }
        items.push(item);
    }
    if items.is_empty() {
        return Err(HarnessError::NoItems);
    }
    Ok(items)
}

/// Splits off the first `fraction` of items (rounded up, at least one, leaving
/// at least one) for fitness evaluation; the rest are held out.
pub fn split_dev(
    items: &[DatasetItem],
    fraction: f64,
) -> Result<(Vec<DatasetItem>, Vec<DatasetItem>), HarnessError> {
    if items.len() < 2 {
        return Err(HarnessError::TooSmallToSplit(items.len()));
    }
    let fraction = if fraction.is_finite() { fraction.clamp(0.0, 1.0) } else { DEFAULT_DEV_FRACTION };
    let dev = ((items.len() as f64 * fraction).ceil() as usize).clamp(1, items.len() - 1);
    Ok((items[..dev].to_vec(), items[dev..].to_vec()))
}
