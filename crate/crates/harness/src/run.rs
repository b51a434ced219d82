use std::sync::Arc;
use std::time::{Duration, Instant};

use futures::stream::{self, StreamExt};
use kitchen_core::{execute, RunRecord, TaskBundle};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::client::{ChatClient, ClientError};
use crate::config::ExperimentConfig;
use crate::parse::parse_plan;
use crate::prompt::{render_prompt, Method};
use crate::results::{completed_ids, load_rows, now_ms, Controller, ResultRow, ResultStore};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("results file: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSummary {
    pub skipped: usize,
    pub attempted: usize,
    pub succeeded: usize,
    pub parse_failures: usize,
    pub infra_failures: usize,
}

/// Settings for one pass over a bundle set.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub model: String,
    pub method: Method,
    pub retries: u32,
    pub backoff: Duration,
    pub parallelism: usize,
}

impl RunOptions {
    pub fn from_config(cfg: &ExperimentConfig) -> RunOptions {
        RunOptions {
            model: cfg.model.clone(),
            method: cfg.method,
            retries: cfg.retries,
            backoff: Duration::from_millis(cfg.backoff_ms),
            parallelism: cfg.parallelism.max(1),
        }
    }
}

/// Queries the model on every bundle not yet answered in `store`, executes
/// each plan and appends one row per bundle. Safe to rerun after a crash.
pub async fn run_experiment<C: ChatClient>(
    opts: &RunOptions,
    bundles: Vec<TaskBundle>,
    client: &C,
    store: &mut ResultStore,
) -> Result<RunSummary, RunError> {
    let done = completed_ids(&load_rows(store.path())?, &opts.model, opts.method);
    let mut summary = RunSummary::default();
    let todo: Vec<Arc<TaskBundle>> = bundles
        .into_iter()
        .filter(|b| {
            let skip = done.contains(&b.id);
            summary.skipped += skip as usize;
            !skip
        })
        .map(Arc::new)
        .collect();

    let mut rows = stream::iter(todo)
        .map(|b| run_one(opts, b, client))
        .buffer_unordered(opts.parallelism);
    while let Some(row) = rows.next().await {
        summary.attempted += 1;
        if row.infra_failure {
            summary.infra_failures += 1;
        } else if row.parse_error.is_some() {
            summary.parse_failures += 1;
        } else if row.record.success {
            summary.succeeded += 1;
        }
        tracing::info!(
            bundle = %row.bundle_id,
            success = row.record.success,
            reason = row.record.failure_reason.as_deref().unwrap_or(""),
            "finished"
        );
        store.append(&row)?;
    }
    Ok(summary)
}

async fn complete_with_retries<C: ChatClient>(
    opts: &RunOptions,
    client: &C,
    prompt: &str,
) -> (Result<crate::client::Completion, ClientError>, u32) {
    let mut attempts = 0;
    loop {
        attempts += 1;
        match client.complete(prompt).await {
            Err(e) if e.is_retryable() && attempts <= opts.retries => {
                tracing::warn!("attempt {attempts} failed: {e}");
                tokio::time::sleep(opts.backoff * 2u32.saturating_pow(attempts - 1)).await;
            }
            other => return (other, attempts),
        }
    }
}

async fn run_one<C: ChatClient>(
    opts: &RunOptions,
    bundle: Arc<TaskBundle>,
    client: &C,
) -> ResultRow {
    let started = Instant::now();
    let mut row = ResultRow::for_bundle(&bundle, Controller::Model, &opts.model);
    row.method = Some(opts.method);
    let n = bundle.n_agents;

    let prompt = match render_prompt(&bundle, opts.method) {
        Ok(p) => p,
        Err(e) => {
            row.record = RunRecord::failed_before_start(n, format!("bad-bundle: {e}"));
            row.infra_failure = true;
            row.infra_error = Some(e.to_string());
            return row;
        }
    };

    let (result, attempts) = complete_with_retries(opts, client, &prompt).await;
    row.attempts = attempts;
    row.wall_ms = started.elapsed().as_millis() as u64;
    let completion = match result {
        Ok(c) => c,
        Err(e) => {
            row.infra_failure = true;
            row.infra_error = Some(e.to_string());
            row.record = RunRecord::failed_before_start(n, format!("infra: {e}"));
            return row;
        }
    };
    row.usage = completion.usage;

    match parse_plan(&completion.text) {
        Ok(parsed) => {
            row.cot = parsed.cot;
            if let Err(e) = parsed.plan.check_agents(n) {
                row.parse_error = Some(e.to_string());
                row.record = RunRecord::failed_before_start(n, format!("parse-error: {e}"));
            } else {
                row.record = execute(&bundle, &parsed.plan);
            }
            row.plan = Some(parsed.plan);
        }
        Err(e) => {
            row.parse_error = Some(e.to_string());
            row.record =
                RunRecord::failed_before_start(n, format!("parse-error: {}: {e}", e.code()));
        }
    }
    row.raw_output = Some(completion.text);
    row.timestamp = now_ms();
    row
}
