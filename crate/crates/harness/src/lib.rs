//! Prompting, plan extraction and batch evaluation of language models on
//! kitchen bundles, plus the JSONL results store shared with live sessions.

pub mod client;
pub mod config;
pub mod parse;
pub mod prompt;
pub mod results;
pub mod run;

pub use client::{ChatClient, ClientError, Completion, OpenAiClient, Usage};
pub use config::{BundleSource, ConfigError, ExperimentConfig};
pub use parse::{parse_plan, ParseError, ParsedPlan};
pub use prompt::{render_prompt, Method, PromptError};
pub use results::{
    load_rows, rescore, Controller, GroupKey, GroupScore, Grouping, ResultRow, ResultStore,
};
pub use run::{run_experiment, RunError, RunOptions, RunSummary};
