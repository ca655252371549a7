//! Page fetching, either over HTTP or from a local corpus directory.
//!
//! Corpus layout: `http(s)://host/path` maps to `<root>/host/path`; a path
//! ending in `/` maps to `index.html` inside that directory. Port, query and
//! scheme do not take part in the mapping.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use thiserror::Error;
use tokio::sync::Mutex;
use url::Url;

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("http status {0}")]
    Status(u16),
    #[error("timed out")]
    Timeout,
    #[error("too many redirects")]
    TooManyRedirects,
    #[error("non-html content type {0:?}")]
    NonHtml(String),
    #[error("no corpus file at {0}")]
    NotInCorpus(PathBuf),
    #[error("disallowed by robots.txt")]
    Disallowed,
    #[error("{0}")]
    Transport(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiveOptions {
    pub politeness_delay: Duration,
    pub timeout: Duration,
    pub respect_robots: bool,
    pub user_agent: String,
}

impl Default for LiveOptions {
    fn default() -> Self {
        LiveOptions {
            politeness_delay: Duration::from_millis(1000),
            timeout: Duration::from_secs(15),
            respect_robots: false,
            user_agent: concat!("ontocrawl/", env!("CARGO_PKG_VERSION")).to_owned(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FetchMode {
    Live(LiveOptions),
    Corpus { root: PathBuf },
}

#[derive(Clone, Debug)]
pub struct Fetched {
    pub final_url: Url,
    pub body: Vec<u8>,
    /// Wall clock in live mode; the file's modification time in corpus mode.
    pub fetched_at: DateTime<Utc>,
}

pub const MAX_REDIRECTS: usize = 5;

pub fn corpus_path(root: &Path, url: &Url) -> Option<PathBuf> {
    let host = url.host_str()?;
    let mut path = root.join(host);
    let segments: Vec<&str> = url.path_segments().map(|s| s.collect()).unwrap_or_default();
    for seg in &segments {
        if seg.is_empty() {
            continue;
        }
        if *seg == ".." || *seg == "." {
            return None;
        }
        path.push(seg);
    }
    if segments.last().is_none_or(|s| s.is_empty()) {
        path.push("index.html");
    }
    Some(path)
}

pub struct Fetcher {
    mode: FetchMode,
    client: Option<reqwest::Client>,
    /// Earliest instant the next request to each host may start.
    next_slot: Mutex<HashMap<String, Instant>>,
    robots: Mutex<HashMap<String, RobotRules>>,
}

impl Fetcher {
    pub fn new(mode: FetchMode) -> Result<Self, FetchError> {
        let client = match &mode {
            FetchMode::Live(opts) => Some(
                reqwest::Client::builder()
                    .redirect(reqwest::redirect::Policy::limited(MAX_REDIRECTS))
                    .timeout(opts.timeout)
                    .user_agent(opts.user_agent.clone())
                    .build()
                    .map_err(|e| FetchError::Transport(e.to_string()))?,
            ),
            FetchMode::Corpus { .. } => None,
        };
        Ok(Fetcher {
            mode,
            client,
            next_slot: Mutex::new(HashMap::new()),
            robots: Mutex::new(HashMap::new()),
        })
    }

    pub fn mode(&self) -> &FetchMode {
        &self.mode
    }

    pub async fn fetch(&self, url: &Url) -> Result<Fetched, FetchError> {
        match &self.mode {
            FetchMode::Corpus { root } => fetch_corpus(root, url).await,
            FetchMode::Live(opts) => {
                let client = self.client.as_ref().expect("live fetcher has a client");
                if opts.respect_robots && !self.robots_allow(client, opts, url).await {
                    return Err(FetchError::Disallowed);
                }
                self.wait_turn(url, opts.politeness_delay).await;
                fetch_live(client, url).await
            }
        }
    }

    async fn wait_turn(&self, url: &Url, delay: Duration) {
        let host = url.host_str().unwrap_or_default().to_owned();
        let start = {
            let mut slots = self.next_slot.lock().await;
            let now = Instant::now();
            let start = slots.get(&host).copied().filter(|t| *t > now).unwrap_or(now);
            slots.insert(host, start + delay);
            start
        };
        tokio::time::sleep_until(start.into()).await;
    }

    async fn robots_allow(&self, client: &reqwest::Client, opts: &LiveOptions, url: &Url) -> bool {
        let key = url.origin().ascii_serialization();
        if let Some(rules) = self.robots.lock().await.get(&key) {
            return rules.allows(url.path());
        }
        let mut robots_url = url.clone();
        robots_url.set_path("/robots.txt");
        robots_url.set_query(None);
        self.wait_turn(url, opts.politeness_delay).await;
        let rules = match client.get(robots_url).send().await {
            Ok(resp) if resp.status().is_success() => RobotRules::parse(&resp.text().await.unwrap_or_default()),
            _ => RobotRules::default(),
        };
        let allowed = rules.allows(url.path());
        self.robots.lock().await.insert(key, rules);
        allowed
    }
}

async fn fetch_corpus(root: &Path, url: &Url) -> Result<Fetched, FetchError> {
    let path = corpus_path(root, url).ok_or_else(|| FetchError::NotInCorpus(root.to_owned()))?;
    let not_found = || FetchError::NotInCorpus(path.clone());
    let meta = tokio::fs::metadata(&path).await.map_err(|_| not_found())?;
    if !meta.is_file() {
        return Err(not_found());
    }
    let body = tokio::fs::read(&path).await.map_err(|_| not_found())?;
    let fetched_at = meta.modified().map(DateTime::<Utc>::from).unwrap_or(DateTime::UNIX_EPOCH);
    Ok(Fetched {
        final_url: url.clone(),
        body,
        fetched_at,
    })
}

fn is_html(content_type: &str) -> bool {
    let mime = content_type.split(';').next().unwrap_or("").trim().to_ascii_lowercase();
    mime == "text/html" || mime == "application/xhtml+xml"
}

async fn fetch_live(client: &reqwest::Client, url: &Url) -> Result<Fetched, FetchError> {
    let resp = client.get(url.clone()).send().await.map_err(map_reqwest)?;
    let status = resp.status();
    if !status.is_success() {
        return Err(FetchError::Status(status.as_u16()));
    }
    if let Some(ct) = resp.headers().get(reqwest::header::CONTENT_TYPE) {
        let ct = ct.to_str().unwrap_or_default();
        if !is_html(ct) {
            return Err(FetchError::NonHtml(ct.to_owned()));
        }
    }
    let final_url = resp.url().clone();
    let body = resp.bytes().await.map_err(map_reqwest)?.to_vec();
    Ok(Fetched {
        final_url,
        body,
        fetched_at: Utc::now(),
    })
}

fn map_reqwest(e: reqwest::Error) -> FetchError {
    if e.is_timeout() {
        FetchError::Timeout
    } else if e.is_redirect() {
        FetchError::TooManyRedirects
    } else {
        FetchError::Transport(e.to_string())
    }
}

/// The `User-agent: *` group of a robots.txt file. Longest matching prefix
/// wins; `Allow` beats `Disallow` on ties.
#[derive(Clone, Debug, Default)]
pub struct RobotRules {
    rules: Vec<(String, bool)>,
}

impl RobotRules {
    pub fn parse(body: &str) -> RobotRules {
        let mut rules = Vec::new();
        let mut in_star_group = false;
        let mut last_was_agent = false;
        for line in body.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            let Some((key, value)) = line.split_once(':') else { continue };
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim();
            match key.as_str() {
                "user-agent" => {
                    if !last_was_agent {
                        in_star_group = false;
                    }
                    in_star_group |= value == "*";
                    last_was_agent = true;
                }
                "disallow" | "allow" => {
                    last_was_agent = false;
                    if in_star_group && !value.is_empty() {
                        rules.push((value.to_owned(), key == "allow"));
                    }
                }
                _ => last_was_agent = false,
            }
        }
        RobotRules { rules }
    }

    pub fn allows(&self, path: &str) -> bool {
        self.rules
            .iter()
            .filter(|(prefix, _)| path.starts_with(prefix.as_str()))
            .max_by_key(|(prefix, allow)| (prefix.len(), *allow))
            .is_none_or(|(_, allow)| *allow)
    }
}
