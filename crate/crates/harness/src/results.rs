use std::collections::{BTreeMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use kitchen_core::metrics::{score, DatasetScore, MetricsError, TaskOutcome};
use kitchen_core::taskgen::{Difficulty, RecipeTier};
use kitchen_core::{execute, Plan, RunRecord, TaskBundle, Time};
use serde::{Deserialize, Serialize};

use crate::client::Usage;
use crate::prompt::Method;

/// Who produced the plan or the live actions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Controller {
    Model,
    Human,
    Scripted,
}

/// One line of a results file: everything needed to rescore the run or
/// replay the plan without calling the model again.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub bundle_id: String,
    pub controller: Controller,
    /// Model name, or an operator label for human sessions.
    pub model: String,
    #[serde(default)]
    pub method: Option<Method>,
    pub difficulty: Difficulty,
    pub n_agents: usize,
    pub t_max: Time,
    pub d_max: u64,
    #[serde(default)]
    pub raw_output: Option<String>,
    #[serde(default)]
    pub cot: Option<serde_json::Value>,
    #[serde(default)]
    pub plan: Option<Plan>,
    #[serde(default)]
    pub parse_error: Option<String>,
    pub record: RunRecord,
    /// The endpoint never produced an answer. Such rows are kept for audit
    /// but excluded from scores.
    #[serde(default)]
    pub infra_failure: bool,
    #[serde(default)]
    pub infra_error: Option<String>,
    #[serde(default)]
    pub attempts: u32,
    #[serde(default)]
    pub wall_ms: u64,
    #[serde(default)]
    pub usage: Option<Usage>,
    /// Milliseconds since the Unix epoch.
    pub timestamp: u64,
}

pub fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

impl ResultRow {
    /// A row with the bundle fields filled in and an empty record.
    pub fn for_bundle(bundle: &TaskBundle, controller: Controller, model: &str) -> ResultRow {
        ResultRow {
            bundle_id: bundle.id.clone(),
            controller,
            model: model.to_string(),
            method: None,
            difficulty: bundle.difficulty,
            n_agents: bundle.n_agents,
            t_max: bundle.t_max,
            d_max: bundle.d_max,
            raw_output: None,
            cot: None,
            plan: None,
            parse_error: None,
            record: RunRecord::failed_before_start(bundle.n_agents, "not-run"),
            infra_failure: false,
            infra_error: None,
            attempts: 0,
            wall_ms: 0,
            usage: None,
            timestamp: now_ms(),
        }
    }

    pub fn outcome(&self) -> TaskOutcome {
        TaskOutcome::from_record(&self.record, self.t_max, self.d_max)
    }

    /// Re-executes the stored plan. `None` when the row has no plan.
    pub fn replay(&self, bundle: &std::sync::Arc<TaskBundle>) -> Option<RunRecord> {
        self.plan.as_ref().map(|p| execute(bundle, p))
    }
}

/// Append-only JSONL results file.
#[derive(Debug)]
pub struct ResultStore {
    path: PathBuf,
    file: File,
}

impl ResultStore {
    pub fn open(path: &Path) -> std::io::Result<ResultStore> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(ResultStore {
            path: path.to_path_buf(),
            file,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Writes and flushes one row, so a crash loses at most the row in
    /// flight.
    pub fn append(&mut self, row: &ResultRow) -> std::io::Result<()> {
        let mut line = serde_json::to_string(row).map_err(std::io::Error::other)?;
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.flush()
    }
}

/// Reads every complete row. A torn last line from an interrupted write is
/// skipped; a corrupt line elsewhere is an error.
pub fn load_rows(path: &Path) -> std::io::Result<Vec<ResultRow>> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    let lines: Vec<String> = BufReader::new(file).lines().collect::<Result<_, _>>()?;
    let last = lines.iter().rposition(|l| !l.trim().is_empty());
    let mut rows = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(row) => rows.push(row),
            Err(e) if Some(i) == last => {
                tracing::warn!("{}: skipping torn last line: {e}", path.display());
            }
            Err(e) => {
                return Err(std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("{}:{}: {e}", path.display(), i + 1),
                ))
            }
        }
    }
    Ok(rows)
}

/// Bundle ids already answered by `model` with `method`. Infra failures do
/// not count, so a rerun tries them again.
pub fn completed_ids(rows: &[ResultRow], model: &str, method: Method) -> HashSet<String> {
    rows.iter()
        .filter(|r| {
            r.controller == Controller::Model
                && r.model == model
                && r.method == Some(method)
                && !r.infra_failure
        })
        .map(|r| r.bundle_id.clone())
        .collect()
}

/// How rows are split into score groups. Every grouping separates
/// controller, model and method.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grouping {
    Run,
    /// Also by recipe tier.
    Tier,
    /// Also by full difficulty triple and agent count.
    #[default]
    Cell,
}

impl std::str::FromStr for Grouping {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "run" => Ok(Grouping::Run),
            "tier" => Ok(Grouping::Tier),
            "cell" => Ok(Grouping::Cell),
            _ => Err(format!(
                "unknown grouping `{s}` (expected run, tier or cell)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroupKey {
    pub controller: Controller,
    pub model: String,
    pub method: Option<Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tier: Option<RecipeTier>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub difficulty: Option<Difficulty>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_agents: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_dishes: Option<usize>,
}

impl GroupKey {
    fn of(r: &ResultRow, grouping: Grouping) -> GroupKey {
        let cell = grouping == Grouping::Cell;
        GroupKey {
            controller: r.controller,
            model: r.model.clone(),
            method: r.method,
            tier: (grouping == Grouping::Tier).then_some(r.difficulty.c_recipe),
            difficulty: cell.then_some(r.difficulty),
            n_agents: cell.then_some(r.n_agents),
            n_dishes: cell.then_some(r.difficulty.c_order),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupScore {
    #[serde(flatten)]
    pub key: GroupKey,
    pub score: DatasetScore,
    pub infra_excluded: usize,
}

/// Scores rows per group. Infra failures are left out of every metric and
/// only counted.
pub fn rescore(rows: &[ResultRow], grouping: Grouping) -> Result<Vec<GroupScore>, MetricsError> {
    let mut groups: BTreeMap<GroupKey, (Vec<TaskOutcome>, usize)> = BTreeMap::new();
    for r in rows {
        let entry = groups.entry(GroupKey::of(r, grouping)).or_default();
        if r.infra_failure {
            entry.1 += 1;
        } else {
            entry.0.push(r.outcome());
        }
    }
    groups
        .into_iter()
        .filter(|(_, (outcomes, _))| !outcomes.is_empty())
        .map(|(key, (outcomes, infra_excluded))| {
            Ok(GroupScore {
                key,
                score: score(&outcomes)?,
                infra_excluded,
            })
        })
        .collect()
}
