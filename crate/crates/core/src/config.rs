//! The single JSON config file shared by every subcommand.
//!
//! ```json
//! {
//!   "manifest": "ontology/manifest.json",
//!   "seeds": ["http://cricket.test/"],
//!   "seeds_file": "seeds.txt",
//!   "max_pages": 250,
//!   "tolerance_limit": 2,
//!   "relevance_limits": {"cricket": "2.0", "football": 2, "hockey": "2.0"},
//!   "fetch": {"mode": "corpus", "root": "corpus"},
//!   "max_concurrent_fetches": 1,
//!   "output_dir": "out",
//!   "server": {"bind": "127.0.0.1:8080", "static_dir": "web"}
//! }
//! ```
//!
//! Relative paths are resolved against the config file's directory.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;
use serde_json::Value;
use thiserror::Error;

use crate::crawler::CrawlConfig;
use crate::fetch::{FetchMode, LiveOptions};
use crate::ontology::{parse_milli, OntologyError, OntologySet};
use crate::relevance::RelevanceLimits;
use crate::repository::Layout;
use crate::urlnorm::parse_absolute;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config is not valid JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("config field `{field}`: {message}")]
    Field { field: &'static str, message: String },
    #[error("ontology: {0}")]
    Ontology(#[from] OntologyError),
}

fn field(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field,
        message: message.into(),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    manifest: Option<PathBuf>,
    seeds: Option<Vec<String>>,
    seeds_file: Option<PathBuf>,
    max_pages: Option<i64>,
    #[serde(default)]
    tolerance_limit: i64,
    relevance_limits: Option<serde_json::Map<String, Value>>,
    fetch: Option<RawFetch>,
    max_concurrent_fetches: Option<i64>,
    output_dir: Option<PathBuf>,
    server: Option<RawServer>,
}

#[derive(Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
enum RawFetch {
    Corpus {
        root: PathBuf,
    },
    Live {
        politeness_delay_ms: Option<u64>,
        timeout_ms: Option<u64>,
        #[serde(default)]
        respect_robots: bool,
        user_agent: Option<String>,
    },
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawServer {
    bind: Option<String>,
    static_dir: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct ServerConfig {
    pub bind: SocketAddr,
    pub static_dir: PathBuf,
}

#[derive(Clone, Debug)]
pub struct AppConfig {
    pub path: PathBuf,
    pub manifest: PathBuf,
    pub ontologies: OntologySet,
    pub crawl: CrawlConfig,
    pub layout: Layout,
    pub server: ServerConfig,
}

pub const DEFAULT_BIND: &str = "127.0.0.1:8080";

impl AppConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let raw = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&raw, path)
    }

    pub fn parse(json: &str, path: &Path) -> Result<Self, ConfigError> {
        let raw: RawConfig = serde_json::from_str(json)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &Path| base.join(p);

        let manifest = resolve(&raw.manifest.ok_or_else(|| field("manifest", "is required"))?);
        if !manifest.is_file() {
            return Err(field("manifest", format!("{} does not exist", manifest.display())));
        }
        let ontologies = OntologySet::load_manifest(&manifest)?;

        let mut seed_strings = raw.seeds.unwrap_or_default();
        if let Some(file) = raw.seeds_file {
            let file = resolve(&file);
            let body = std::fs::read_to_string(&file)
                .map_err(|e| field("seeds_file", format!("cannot read {}: {e}", file.display())))?;
            seed_strings.extend(
                body.lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty() && !l.starts_with('#'))
                    .map(str::to_owned),
            );
        }
        if seed_strings.is_empty() {
            return Err(field("seeds", "at least one seed URL is required (seeds or seeds_file)"));
        }
        let seeds = seed_strings
            .iter()
            .map(|s| parse_absolute(s).map_err(|e| field("seeds", e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;

        let max_pages = raw.max_pages.ok_or_else(|| field("max_pages", "is required"))?;
        if max_pages < 1 {
            return Err(field("max_pages", "must be at least 1"));
        }
        let tolerance_limit =
            u32::try_from(raw.tolerance_limit).map_err(|_| field("tolerance_limit", "must be a non-negative integer"))?;
        let max_concurrent_fetches = raw.max_concurrent_fetches.unwrap_or(1);
        if max_concurrent_fetches < 1 {
            return Err(field("max_concurrent_fetches", "must be at least 1"));
        }

        let limits = parse_limits(raw.relevance_limits, &ontologies)?;

        let fetch = match raw.fetch.ok_or_else(|| field("fetch", "is required"))? {
            RawFetch::Corpus { root } => {
                let root = resolve(&root);
                if !root.is_dir() {
                    return Err(field("fetch", format!("corpus root {} is not a directory", root.display())));
                }
                FetchMode::Corpus { root }
            }
            RawFetch::Live {
                politeness_delay_ms,
                timeout_ms,
                respect_robots,
                user_agent,
            } => {
                let defaults = LiveOptions::default();
                FetchMode::Live(LiveOptions {
                    politeness_delay: politeness_delay_ms.map(Duration::from_millis).unwrap_or(defaults.politeness_delay),
                    timeout: timeout_ms.map(Duration::from_millis).unwrap_or(defaults.timeout),
                    respect_robots,
                    user_agent: user_agent.unwrap_or(defaults.user_agent),
                })
            }
        };

        let layout = Layout::new(resolve(&raw.output_dir.unwrap_or_else(|| PathBuf::from("out"))));
        let server_raw = raw.server.unwrap_or_default();
        let bind = server_raw
            .bind
            .as_deref()
            .unwrap_or(DEFAULT_BIND)
            .parse()
            .map_err(|e| field("server", format!("bad bind address: {e}")))?;
        let static_dir = resolve(&server_raw.static_dir.unwrap_or_else(|| PathBuf::from("web")));

        Ok(AppConfig {
            path: path.to_owned(),
            manifest,
            ontologies,
            crawl: CrawlConfig {
                seeds,
                max_pages: max_pages as usize,
                tolerance_limit,
                limits,
                fetch,
                max_concurrent_fetches: max_concurrent_fetches as usize,
            },
            layout,
            server: ServerConfig { bind, static_dir },
        })
    }
}

fn parse_limits(raw: Option<serde_json::Map<String, Value>>, set: &OntologySet) -> Result<RelevanceLimits, ConfigError> {
    let raw = raw.ok_or_else(|| field("relevance_limits", "is required"))?;
    let mut limits: Vec<Option<u64>> = vec![None; set.len()];
    for (name, value) in raw {
        let idx = set
            .index_of(&name)
            .ok_or_else(|| field("relevance_limits", format!("unknown domain {name:?}")))?;
        let text = match &value {
            Value::String(s) => s.clone(),
            Value::Number(n) => n.to_string(),
            _ => return Err(field("relevance_limits", format!("limit for {name:?} must be a decimal"))),
        };
        let milli = parse_milli(&text)
            .filter(|&m| m >= 1)
            .ok_or_else(|| field("relevance_limits", format!("limit for {name:?} must be a positive decimal with at most 3 places, got {text}")))?;
        limits[idx] = Some(milli);
    }
    let limits = limits
        .into_iter()
        .enumerate()
        .map(|(i, l)| l.ok_or_else(|| field("relevance_limits", format!("no limit for domain {:?}", set.domain(i).name()))))
        .collect::<Result<Vec<_>, _>>()?;
    RelevanceLimits::new(limits).map_err(|e| field("relevance_limits", e.to_string()))
}
