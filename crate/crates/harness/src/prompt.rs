use std::fmt;
use std::str::FromStr;

use kitchen_core::TaskBundle;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const IO_TEMPLATE: &str = include_str!("../templates/io.txt");
const COT_TEMPLATE: &str = include_str!("../templates/cot.txt");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Io,
    Cot,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Io => "io",
            Method::Cot => "cot",
        }
    }

    fn template(self) -> &'static str {
        match self {
            Method::Io => IO_TEMPLATE,
            Method::Cot => COT_TEMPLATE,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "io" => Ok(Method::Io),
            "cot" => Ok(Method::Cot),
            other => Err(format!("unknown method `{other}` (expected io or cot)")),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("time constant `{0}` must be positive")]
    MissingConstant(&'static str),
    #[error("order `{0}` has no recipe in the bundle")]
    UnknownRecipe(String),
}

/// The task section: map JSON, recipe texts, orders and agent names.
pub fn task_text(bundle: &TaskBundle) -> Result<String, PromptError> {
    let mut spec = bundle.map.to_spec();
    spec.agents.truncate(bundle.n_agents);
    let map_json = serde_json::to_string_pretty(&spec).expect("map spec serializes");
    let mut out = format!("Map JSON:\n{map_json}\n\nRecipes:\n");
    let mut listed: Vec<&str> = Vec::new();
    for id in &bundle.orders {
        if listed.contains(&id.as_str()) {
            continue;
        }
        listed.push(id);
        let r = bundle
            .recipe(id)
            .ok_or_else(|| PromptError::UnknownRecipe(id.clone()))?;
        out.push_str(&format!("    {}: {}\n", r.id, r.text));
    }
    out.push_str("\nOrders:\n");
    for (i, id) in bundle.orders.iter().enumerate() {
        out.push_str(&format!("    {}. {id}\n", i + 1));
    }
    out.push_str("\nAgents:\n");
    for (i, pos) in spec.agents.iter().enumerate() {
        out.push_str(&format!(
            "    agent{}: starts at [{}, {}]\n",
            i + 1,
            pos.x,
            pos.y
        ));
    }
    Ok(out)
}

/// Fills the method's template from the bundle. Byte-stable per
/// `(bundle, method)`.
pub fn render_prompt(bundle: &TaskBundle, method: Method) -> Result<String, PromptError> {
    let c = &bundle.constants;
    if let Some(name) = c.first_non_positive() {
        return Err(PromptError::MissingConstant(name));
    }
    let task = task_text(bundle)?;
    let slots = [
        ("{MOVE_TIME}", c.move_per_tile.to_string()),
        ("{INTERACT_TIME}", c.interact.to_string()),
        ("{PROCESS_CUT_TIME}", c.cut.to_string()),
        ("{PROCESS_POT_COOK_TIME}", c.pot_cook.to_string()),
        ("{PROCESS_PAN_COOK_TIME}", c.pan_cook.to_string()),
        ("{PROCESS_WASH_PLATE_TIME}", c.wash_plate.to_string()),
        (
            "{RETURN_DIRTY_PLATE_TIME}",
            c.dirty_plate_return.to_string(),
        ),
    ];
    let mut text = method.template().to_string();
    for (slot, value) in slots {
        text = text.replace(slot, &value);
    }
    // The task goes in last so map or recipe text is never re-scanned.
    Ok(text.replace("{task}", task.trim_end()))
}
