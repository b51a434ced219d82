use kitchen_core::sim::PlanError;
use kitchen_core::Plan;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("no JSON object found in model output")]
    NoJson,
    #[error("JSON object has no `plan` key")]
    MissingPlan,
    #[error(transparent)]
    Schema(#[from] PlanError),
}

impl ParseError {
    pub fn code(&self) -> &'static str {
        match self {
            ParseError::NoJson => "no-json",
            ParseError::MissingPlan => "missing-plan",
            ParseError::Schema(_) => "schema",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParsedPlan {
    pub plan: Plan,
    /// Reasoning steps, kept for the record but never executed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cot: Option<serde_json::Value>,
}

/// Byte span of the balanced `{...}` starting at `start`, skipping braces
/// inside JSON strings.
fn balanced_object(text: &str, start: usize) -> Option<&str> {
    let bytes = text.as_bytes();
    let (mut depth, mut in_str, mut escaped) = (0usize, false, false);
    for (i, &b) in bytes.iter().enumerate().skip(start) {
        if in_str {
            match b {
                _ if escaped => escaped = false,
                b'\\' => escaped = true,
                b'"' => in_str = false,
                _ => {}
            }
            continue;
        }
        match b {
            b'"' => in_str = true,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(&text[start..=i]);
                }
            }
            _ => {}
        }
    }
    None
}

/// All top-level JSON objects in the text, in order of appearance.
fn json_objects(text: &str) -> Vec<serde_json::Map<String, serde_json::Value>> {
    let mut found = Vec::new();
    let mut from = 0;
    while let Some(off) = text[from..].find('{') {
        let start = from + off;
        match balanced_object(text, start) {
            Some(slice) => match serde_json::from_str::<serde_json::Value>(slice) {
                Ok(serde_json::Value::Object(map)) => {
                    found.push(map);
                    from = start + slice.len();
                }
                _ => from = start + 1,
            },
            None => from = start + 1,
        }
    }
    found
}

/// Extracts the plan from raw model text. Markdown fences and surrounding
/// prose are tolerated; the first top-level object with a `plan` key wins.
pub fn parse_plan(raw: &str) -> Result<ParsedPlan, ParseError> {
    let objects = json_objects(raw);
    if objects.is_empty() {
        return Err(ParseError::NoJson);
    }
    let mut doc = objects
        .into_iter()
        .find(|o| o.contains_key("plan"))
        .ok_or(ParseError::MissingPlan)?;
    let cot = doc.remove("CoT");
    let plan = Plan::from_value(serde_json::Value::Object(doc))?;
    Ok(ParsedPlan { plan, cot })
}
