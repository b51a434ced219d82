use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use kitchen_core::taskgen::{assemble_bundle, assemble_for_orders, solve, Category};
use kitchen_core::{execute, TaskBundle};
use kitchen_harness::{
    load_rows, rescore, run_experiment, ExperimentConfig, GroupScore, Grouping, OpenAiClient,
    ResultStore, RunOptions,
};
use kitchen_sched::{generate_instance, optimal_makespan_within, AbstractInstance, Profile};

#[derive(Parser)]
#[command(
    name = "kitchen",
    version,
    about = "Multi-agent kitchen planning benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a task bundle.
    Gen {
        #[arg(long, conflicts_with = "orders", required_unless_present = "orders")]
        category: Option<Category>,
        /// Comma-separated recipe ids, served in this order.
        #[arg(long, value_delimiter = ',')]
        orders: Option<Vec<String>>,
        #[arg(long, default_value_t = 1)]
        dishes: usize,
        #[arg(long, default_value_t = 1)]
        agents: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Produce the scripted reference plan for a bundle.
    Reference {
        #[arg(long)]
        bundle: PathBuf,
        /// Agents the script may use; defaults to all of them.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Execute a plan file against a bundle and print the run record.
    Exec {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score one or more results files.
    Eval {
        #[arg(long = "runs", required = true)]
        runs: Vec<PathBuf>,
        /// Write the grouped scores as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// run, tier, or cell (difficulty and agent count).
        #[arg(long, default_value = "cell")]
        group: Grouping,
    },
    /// Generate an abstract scheduling instance.
    GenAbstract {
        #[arg(long, default_value = "abstract-v1")]
        profile: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute a minimum-makespan schedule for an abstract instance.
    Oracle {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Wall-clock budget in seconds; without it the search runs to proof.
        #[arg(long)]
        budget: Option<f64>,
    },
    /// Run a model over a bundle set as described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Serve live sessions over HTTP and WebSocket.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
        #[arg(long, default_value = "results/human.jsonl")]
        results: PathBuf,
        /// Environment variable holding the bearer token for opening sessions.
        #[arg(long)]
        create_token_env: Option<String>,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_bundle(path: &Path) -> Result<Arc<TaskBundle>> {
    let b = TaskBundle::from_json(&read(path)?)
        .with_context(|| format!("bundle {}", path.display()))?;
    Ok(Arc::new(b))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("-".into(), |v| format!("{v:.2}"))
}

fn print_scores(scores: &[GroupScore]) {
    println!(
        "{:<10} {:<20} {:<6} {:<18} {:>5} {:>8} {:>8} {:>8} {:>8} {:>8} {:>6}",
        "controller", "model", "method", "group", "n", "SR", "pOCT", "nOCT", "pMD", "AU", "infra"
    );
    for g in scores {
        let k = &g.key;
        let group = match (k.difficulty, k.tier) {
            (Some(d), _) => format!("{d} a{}", k.n_agents.unwrap_or(0)),
            (None, Some(t)) => t.to_string(),
            (None, None) => "all".into(),
        };
        let s = g.score.percent();
        println!(
            "{:<10} {:<20} {:<6} {:<18} {:>5} {:>8.2} {:>8.2} {:>8} {:>8.2} {:>8} {:>6}",
            format!("{:?}", k.controller).to_lowercase(),
            k.model,
            k.method.map_or("-".into(), |m| m.to_string()),
            group,
            s.n_total,
            s.sr,
            s.poct,
            fmt_opt(s.noct),
            s.pmd,
            fmt_opt(s.au),
            g.infra_excluded,
        );
    }
}

async fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen {
            category,
            orders,
            dishes,
            agents,
            seed,
            out,
        } => {
            let bundle = match (category, orders) {
                (Some(c), _) => assemble_bundle(c, dishes, agents, seed)?,
                (None, Some(o)) => assemble_for_orders(&o, agents, seed)?,
                (None, None) => unreachable!("clap requires one of them"),
            };
            write(&out, &bundle.to_json())?;
            println!(
                "{} ({}) t_max={} d_max={}",
                bundle.id, bundle.difficulty, bundle.t_max, bundle.d_max
            );
        }
        Command::Reference {
            bundle,
            workers,
            out,
        } => {
            let b = load_bundle(&bundle)?;
            let sol = solve(&b, workers.unwrap_or(b.n_agents))?;
            write(&out, &serde_json::to_string_pretty(&sol.plan)?)?;
            println!("reference plan: oct={}", sol.record.oct);
        }
        Command::Exec { bundle, plan, out } => {
            let b = load_bundle(&bundle)?;
            let parsed = kitchen_harness::parse_plan(&read(&plan)?)?;
            let record = execute(&b, &parsed.plan);
            if let Some(out) = out {
                write(&out, &serde_json::to_string_pretty(&record)?)?;
            }
            match &record.failure_reason {
                None => println!("success oct={}", record.oct),
                Some(r) => println!("failed at t={}: {r}", record.oct),
            }
            for a in &record.per_agent {
                println!(
                    "  {}: distance={} work={}",
                    a.agent, a.distance, a.work_time
                );
            }
            if !record.success {
                std::process::exit(2);
            }
        }
        Command::Eval { runs, out, group } => {
            let mut rows = Vec::new();
            for p in &runs {
                rows.extend(load_rows(p).with_context(|| format!("reading {}", p.display()))?);
            }
            let scores = rescore(&rows, group)?;
            if let Some(out) = out {
                write(&out, &serde_json::to_string_pretty(&scores)?)?;
            }
            print_scores(&scores);
        }
        Command::GenAbstract { profile, seed, out } => {
            let inst = generate_instance(&Profile::named(&profile)?, seed)?;
            write(&out, &serde_json::to_string_pretty(&inst)?)?;
            println!(
                "{} tasks, {} edges, {} agents",
                inst.tasks.len(),
                inst.edges.len(),
                inst.agents
            );
        }
        Command::Oracle { input, out, budget } => {
            let inst: AbstractInstance = serde_json::from_str(&read(&input)?)
                .with_context(|| format!("instance {}", input.display()))?;
            let budget = match budget {
                Some(s) if !(s.is_finite() && s >= 0.0) => {
                    bail!("budget must be a nonnegative number of seconds")
                }
                Some(s) => Some(Duration::from_secs_f64(s)),
                None => None,
            };
            let sol = optimal_makespan_within(&inst, budget)?;
            write(&out, &serde_json::to_string_pretty(&sol.schedule)?)?;
            println!(
                "makespan={} optimal={} nodes={}",
                sol.makespan, sol.optimal, sol.nodes
            );
        }
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let bundles = cfg.bundles.load()?;
            let client =
                OpenAiClient::new(&cfg.endpoint, &cfg.model, cfg.api_key(), cfg.timeout())?
                    .temperature(cfg.temperature)
                    .max_tokens(cfg.max_tokens);
            let mut store = ResultStore::open(&cfg.output)
                .with_context(|| format!("opening {}", cfg.output.display()))?;
            let summary =
                run_experiment(&RunOptions::from_config(&cfg), bundles, &client, &mut store)
                    .await?;
            println!("{}", serde_json::to_string(&summary)?);
        }
        Command::Serve {
            addr,
            results,
            create_token_env,
        } => {
            let token = match create_token_env {
                Some(var) => {
                    Some(std::env::var(&var).with_context(|| format!("${var} is not set"))?)
                }
                None => None,
            };
            let state = kitchen_server::AppState::new(&results, token)?;
            let listener = tokio::net::TcpListener::bind(&addr).await?;
            tracing::info!("listening on {}", listener.local_addr()?);
            axum::serve(listener, kitchen_server::router(state)).await?;
        }
    }
    Ok(())
}

#[tokio::main]
async fn main() {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    if let Err(e) = run(Cli::parse()).await {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
