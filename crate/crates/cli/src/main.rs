use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ontocrawl::compare::run_comparison;
use ontocrawl::graph::rebuild_from_repository;
use ontocrawl::ontology::format_milli;
use ontocrawl::server::{router, AppState};
use ontocrawl::{crawl_to_dir, AppConfig, CrawlError, DomainGraph, OntologySet, Scorer, SearchIndex, SearchRequest, Semantics};

#[derive(Parser)]
#[command(name = "ontocrawl", version, about = "Multi-domain ontology-driven focused crawler and search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// Path to the JSON config file.
    #[arg(long)]
    config: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Crawl from the configured seeds and write the page repository.
    Crawl(ConfigArg),
    /// Score one HTML file against every domain and print the scores.
    Score {
        html: PathBuf,
        #[arg(long, conflicts_with = "config", required_unless_present = "config")]
        manifest: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run one crawl per domain plus one multi-domain crawl and compare them.
    Compare(ConfigArg),
    /// Build or inspect the domain graph.
    Graph {
        #[command(subcommand)]
        action: GraphAction,
    },
    /// Search the graph.
    Search {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        query: String,
        /// Comma-separated domain names.
        #[arg(long, value_delimiter = ',')]
        domains: Vec<String>,
        #[arg(long, default_value = "intersect")]
        semantics: Semantics,
        #[arg(long, default_value_t = ontocrawl::search::DEFAULT_LIMIT)]
        limit: usize,
    },
    /// Serve the HTTP API and the static web UI.
    Serve {
        #[command(flatten)]
        config: ConfigArg,
        /// Overrides the configured bind address.
        #[arg(long)]
        bind: Option<std::net::SocketAddr>,
    },
}

#[derive(Subcommand)]
enum GraphAction {
    /// Rebuild graph.json from the repository under the configured limits.
    Build(ConfigArg),
    /// Print statistics of the saved graph.
    Stats(ConfigArg),
}

enum Failure {
    /// Bad input: config, arguments, or files to read. Exit 2.
    Usage(String),
    /// Anything that went wrong while doing the work. Exit 1.
    Runtime(String),
}

type CmdResult = Result<(), Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

fn crawl_failure(e: CrawlError) -> Failure {
    match e {
        CrawlError::InvalidConfig(_) => usage(e),
        _ => runtime(e),
    }
}

fn load_config(path: &Path) -> Result<AppConfig, Failure> {
    AppConfig::load(path).map_err(usage)
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> CmdResult {
    let json = serde_json::to_string_pretty(value).map_err(runtime)?;
    std::fs::write(path, json + "\n").map_err(|e| runtime(format!("{}: {e}", path.display())))
}

async fn cmd_crawl(path: &Path) -> CmdResult {
    let cfg = load_config(path)?;
    let outcome = crawl_to_dir(&cfg.crawl, &cfg.ontologies, &cfg.layout).await.map_err(crawl_failure)?;
    println!("{}", outcome.summary_line());
    Ok(())
}

fn cmd_score(html: &Path, manifest: Option<&Path>, config: Option<&Path>) -> CmdResult {
    let set = match (manifest, config) {
        (Some(m), _) => OntologySet::load_manifest(m).map_err(usage)?,
        (None, Some(c)) => load_config(c)?.ontologies,
        (None, None) => return Err(usage("either --manifest or --config is required")),
    };
    let bytes = std::fs::read(html).map_err(|e| usage(format!("{}: {e}", html.display())))?;
    let page = ontocrawl::html::extract_text(&bytes, &html.display().to_string());
    let scores = Scorer::new(set.clone()).score(&page);
    let mut out = serde_json::Map::new();
    for (d, name) in set.names().into_iter().enumerate() {
        out.insert(name, format_milli(scores.get(d)).into());
    }
    println!("{}", serde_json::Value::Object(out));
    Ok(())
}

async fn cmd_compare(path: &Path) -> CmdResult {
    let cfg = load_config(path)?;
    let report = run_comparison(&cfg.crawl, &cfg.ontologies).await.map_err(crawl_failure)?;
    std::fs::create_dir_all(cfg.layout.root()).map_err(runtime)?;
    let csv = report.to_csv();
    let csv_path = cfg.layout.root().join("compare.csv");
    std::fs::write(&csv_path, &csv).map_err(|e| runtime(format!("{}: {e}", csv_path.display())))?;
    write_json(&cfg.layout.root().join("compare.json"), &report)?;
    print!("{csv}");
    let d = &report.distribution;
    println!(
        "m={} per_domain={:?} space={} checks: superset={} faster={} m_le_sum={}",
        d.m,
        d.per_domain,
        d.space,
        report.checks.multi_superset_of_each_single,
        report.checks.multi_faster_than_single_sum,
        report.checks.m_within_domain_sum
    );
    Ok(())
}

fn cmd_graph_build(path: &Path) -> CmdResult {
    let cfg = load_config(path)?;
    let graph = rebuild_from_repository(&cfg.layout.pages(), &cfg.crawl.limits).map_err(runtime)?;
    graph.save(&cfg.layout.graph(), &cfg.ontologies.names()).map_err(runtime)?;
    println!("{}", serde_json::to_string(&graph.stats()).map_err(runtime)?);
    Ok(())
}

fn cmd_graph_stats(path: &Path) -> CmdResult {
    let cfg = load_config(path)?;
    let (graph, _) = DomainGraph::load(&cfg.layout.graph()).map_err(runtime)?;
    println!("{}", serde_json::to_string(&graph.stats()).map_err(runtime)?);
    Ok(())
}

fn cmd_search(path: &Path, req: SearchRequest) -> CmdResult {
    let cfg = load_config(path)?;
    let index = SearchIndex::load(&cfg.layout).map_err(runtime)?;
    let resp = index.search(&req).map_err(usage)?;
    println!("{}", serde_json::to_string(&resp).map_err(runtime)?);
    Ok(())
}

async fn cmd_serve(path: &Path, bind: Option<std::net::SocketAddr>) -> CmdResult {
    let cfg = load_config(path)?;
    let index = SearchIndex::load(&cfg.layout).map_err(runtime)?;
    let state = AppState::new(index);
    let addr = bind.unwrap_or(cfg.server.bind);
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(runtime)?;
    tracing::info!(addr = %listener.local_addr().map_err(runtime)?, "serving");

    #[cfg(unix)]
    {
        let state = state.clone();
        let layout = cfg.layout.clone();
        tokio::spawn(async move {
            use tokio::signal::unix::{signal, SignalKind};
            let Ok(mut hup) = signal(SignalKind::hangup()) else { return };
            while hup.recv().await.is_some() {
                match state.reload(layout.clone()).await {
                    Ok(()) => tracing::info!("reloaded graph and repository"),
                    Err(e) => tracing::error!(error = %e, "reload failed; keeping previous snapshot"),
                }
            }
        });
    }

    let static_dir = cfg.server.static_dir.is_dir().then(|| cfg.server.static_dir.clone());
    ontocrawl::server::serve(listener, router(state, static_dir)).await.map_err(runtime)
}

async fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Crawl(c) => cmd_crawl(&c.config).await,
        Command::Score { html, manifest, config } => cmd_score(&html, manifest.as_deref(), config.as_deref()),
        Command::Compare(c) => cmd_compare(&c.config).await,
        Command::Graph { action } => match action {
            GraphAction::Build(c) => cmd_graph_build(&c.config),
            GraphAction::Stats(c) => cmd_graph_stats(&c.config),
        },
        Command::Search {
            config,
            query,
            domains,
            semantics,
            limit,
        } => cmd_search(
            &config.config,
            SearchRequest {
                query,
                domains,
                semantics,
                limit,
            },
        ),
        Command::Serve { config, bind } => cmd_serve(&config.config, bind).await,
    }
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "ontocrawl=info,warn".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match run(cli).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
