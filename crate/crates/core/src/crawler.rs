//! The crawl loop.
//!
//! Pages are fetched breadth-first from the seeds. A relevant page (one that
//! clears at least one domain's relevance limit) is stored and its links are
//! queued at irrelevance level 0. Links of an irrelevant page get the page's
//! level plus one; those above the tolerance limit are logged as discarded
//! instead of queued. A URL is never fetched twice.
//!
//! Levels are kept as the best (lowest) level seen over all discovered paths.
//! When a page that was already fetched as irrelevant is rediscovered at a
//! lower level, the improvement is pushed to its cached links, which can
//! revive previously discarded URLs without refetching anything.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;
use std::time::{Duration, Instant};

use chrono::SecondsFormat;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use url::Url;

use crate::fetch::{FetchError, FetchMode, Fetcher};
use crate::html::{extract_links, extract_text};
use crate::ontology::OntologySet;
use crate::relevance::{classify_domains, RelevanceLimits, RelevanceVector, Scorer};
use crate::repository::{sha256_hex, DiscardEntry, JsonlRepository, Layout, PageRecord, PageSink, RepositoryError};

#[derive(Debug, Error)]
pub enum CrawlError {
    #[error("invalid crawl config: {0}")]
    InvalidConfig(String),
    #[error("fetcher setup failed: {0}")]
    Fetcher(#[from] FetchError),
    #[error(transparent)]
    Repository(#[from] RepositoryError),
}

#[derive(Clone, Debug)]
pub struct CrawlConfig {
    pub seeds: Vec<Url>,
    pub max_pages: usize,
    pub tolerance_limit: u32,
    pub limits: RelevanceLimits,
    pub fetch: FetchMode,
    pub max_concurrent_fetches: usize,
}

impl CrawlConfig {
    pub fn validate(&self, set: &OntologySet) -> Result<(), CrawlError> {
        if self.seeds.is_empty() {
            return Err(CrawlError::InvalidConfig("seeds must not be empty".into()));
        }
        if self.max_pages == 0 {
            return Err(CrawlError::InvalidConfig("max_pages must be at least 1".into()));
        }
        if self.max_concurrent_fetches == 0 {
            return Err(CrawlError::InvalidConfig("max_concurrent_fetches must be at least 1".into()));
        }
        if self.limits.len() != set.len() {
            return Err(CrawlError::InvalidConfig(format!(
                "{} relevance limits for {} domains",
                self.limits.len(),
                set.len()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainCount {
    pub domain: String,
    pub stored: u64,
}

/// Deterministic summary of a crawl. Wall-clock time is reported separately
/// in [`CrawlOutcome`] so the report itself is reproducible.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrawlReport {
    pub pages_fetched: u64,
    pub fetch_errors: u64,
    pub pages_stored: u64,
    pub urls_discarded: u64,
    pub per_domain_stored: Vec<DomainCount>,
}

#[derive(Clone, Debug)]
pub struct CrawlOutcome {
    pub report: CrawlReport,
    pub elapsed: Duration,
}

impl CrawlOutcome {
    pub fn summary_line(&self) -> String {
        format!(
            "fetched={} stored={} errors={} discarded={} elapsed_ms={:.3}",
            self.report.pages_fetched,
            self.report.pages_stored,
            self.report.fetch_errors,
            self.report.urls_discarded,
            self.elapsed.as_secs_f64() * 1000.0
        )
    }
}

impl CrawlReport {
    /// Writes the report as pretty JSON, atomically.
    pub fn save(&self, path: &std::path::Path) -> Result<(), RepositoryError> {
        let json = serde_json::to_string_pretty(self).expect("report serializes") + "\n";
        let tmp = path.with_extension("tmp");
        let io = |source| RepositoryError::Io {
            path: path.to_owned(),
            source,
        };
        std::fs::write(&tmp, json).map_err(io)?;
        std::fs::rename(&tmp, path).map_err(io)
    }
}

#[derive(Debug)]
enum UrlState {
    Queued { level: u32 },
    Fetched { level: u32, relevant: bool, links: Vec<Url> },
    Failed,
    Discarded { level: u32 },
}

/// Frontier plus irrelevance-level bookkeeping: every known URL with its best
/// irrelevance level and fetch state.
#[derive(Debug)]
pub struct Frontier {
    tolerance: u32,
    queue: VecDeque<Url>,
    states: HashMap<Url, UrlState>,
    discarded: Vec<DiscardEntry>,
}

impl Frontier {
    pub fn new(tolerance: u32) -> Self {
        Frontier {
            tolerance,
            queue: VecDeque::new(),
            states: HashMap::new(),
            discarded: Vec::new(),
        }
    }

    /// Records that `url` is reachable at `level`.
    pub fn offer(&mut self, url: Url, level: u32) {
        let mut work = vec![(url, level)];
        while let Some((url, level)) = work.pop() {
            match self.states.get_mut(&url) {
                None => self.admit(url, level),
                Some(UrlState::Discarded { level: best }) => {
                    if level < *best {
                        self.admit(url, level);
                    }
                }
                Some(UrlState::Queued { level: best }) => *best = (*best).min(level),
                Some(UrlState::Fetched {
                    level: best,
                    relevant,
                    links,
                }) => {
                    if level < *best {
                        *best = level;
                        if !*relevant {
                            work.extend(links.iter().rev().map(|l| (l.clone(), level + 1)));
                        }
                    }
                }
                Some(UrlState::Failed) => {}
            }
        }
    }

    fn admit(&mut self, url: Url, level: u32) {
        if level <= self.tolerance {
            self.queue.push_back(url.clone());
            self.states.insert(url, UrlState::Queued { level });
        } else {
            self.discarded.push(DiscardEntry {
                url: url.to_string(),
                level,
            });
            self.states.insert(url, UrlState::Discarded { level });
        }
    }

    /// Next URL to fetch. Its level is read back on completion, since it
    /// may improve while the fetch is in flight.
    pub fn pop(&mut self) -> Option<Url> {
        while let Some(url) = self.queue.pop_front() {
            if matches!(self.states.get(&url), Some(UrlState::Queued { .. })) {
                return Some(url);
            }
        }
        None
    }

    pub fn level(&self, url: &Url) -> Option<u32> {
        match self.states.get(url)? {
            UrlState::Queued { level } | UrlState::Fetched { level, .. } | UrlState::Discarded { level } => {
                Some(*level)
            }
            UrlState::Failed => None,
        }
    }

    pub fn is_done(&self, url: &Url) -> bool {
        matches!(self.states.get(url), Some(UrlState::Fetched { .. } | UrlState::Failed))
    }

    pub fn complete(&mut self, url: Url, level: u32, relevant: bool, links: Vec<Url>) {
        let child_level = if relevant { 0 } else { level + 1 };
        let kept = if relevant { Vec::new() } else { links.clone() };
        self.states.insert(
            url,
            UrlState::Fetched {
                level,
                relevant,
                links: kept,
            },
        );
        for link in links {
            self.offer(link, child_level);
        }
    }

    pub fn fail(&mut self, url: Url) {
        self.states.insert(url, UrlState::Failed);
    }

    pub fn take_discarded(&mut self) -> Vec<DiscardEntry> {
        std::mem::take(&mut self.discarded)
    }

    pub fn queued(&self) -> usize {
        self.queue.len()
    }
}

struct Analysis {
    final_url: Url,
    digest: String,
    vector: RelevanceVector,
    links: Vec<Url>,
    body: Vec<u8>,
    fetched_at: String,
}

async fn fetch_and_analyze(fetcher: Arc<Fetcher>, scorer: Arc<Scorer>, url: Url) -> Result<Analysis, FetchError> {
    let fetched = fetcher.fetch(&url).await?;
    let text = extract_text(&fetched.body, fetched.final_url.as_str());
    let vector = scorer.score(&text);
    let links = extract_links(&fetched.body, &fetched.final_url);
    Ok(Analysis {
        digest: sha256_hex(&fetched.body),
        final_url: fetched.final_url,
        vector,
        links,
        body: fetched.body,
        fetched_at: fetched.fetched_at.to_rfc3339_opts(SecondsFormat::Secs, true),
    })
}

/// Crawls into a fresh on-disk repository under `layout` and saves the
/// report next to it.
pub async fn crawl_to_dir(config: &CrawlConfig, set: &OntologySet, layout: &Layout) -> Result<CrawlOutcome, CrawlError> {
    config.validate(set)?;
    let mut repo = JsonlRepository::create(layout.clone())?;
    let outcome = crawl(config, set, &mut repo).await?;
    outcome.report.save(&layout.report())?;
    Ok(outcome)
}

pub async fn crawl(config: &CrawlConfig, set: &OntologySet, sink: &mut dyn PageSink) -> Result<CrawlOutcome, CrawlError> {
    config.validate(set)?;
    let started = Instant::now();
    let fetcher = Arc::new(Fetcher::new(config.fetch.clone())?);
    let scorer = Arc::new(Scorer::new(set.clone()));
    let mut frontier = Frontier::new(config.tolerance_limit);
    for seed in &config.seeds {
        frontier.offer(seed.clone(), 0);
    }

    let mut report = CrawlReport {
        per_domain_stored: set
            .names()
            .into_iter()
            .map(|domain| DomainCount { domain, stored: 0 })
            .collect(),
        ..CrawlReport::default()
    };
    let mut attempts = 0usize;

    while attempts < config.max_pages {
        let room = (config.max_pages - attempts).min(config.max_concurrent_fetches);
        let batch: Vec<Url> = std::iter::from_fn(|| frontier.pop()).take(room).collect();
        if batch.is_empty() {
            break;
        }
        attempts += batch.len();
        let handles: Vec<_> = batch
            .iter()
            .map(|url| tokio::spawn(fetch_and_analyze(fetcher.clone(), scorer.clone(), url.clone())))
            .collect();

        // Results are applied in pop order so state transitions stay sequential.
        for (url, handle) in batch.into_iter().zip(handles) {
            let result = match handle.await {
                Ok(r) => r,
                Err(e) => Err(FetchError::Transport(e.to_string())),
            };
            let analysis = match result {
                Ok(a) => a,
                Err(e) => {
                    tracing::warn!(url = %url, error = %e, "fetch failed");
                    report.fetch_errors += 1;
                    frontier.fail(url);
                    continue;
                }
            };
            report.pages_fetched += 1;
            let mut level = frontier.level(&url).unwrap_or(0);
            let page_url = if analysis.final_url != url {
                if frontier.is_done(&analysis.final_url) {
                    tracing::debug!(url = %url, target = %analysis.final_url, "redirect to an already fetched page");
                    frontier.fail(url);
                    continue;
                }
                if let Some(l) = frontier.level(&analysis.final_url) {
                    level = level.min(l);
                }
                frontier.fail(url);
                analysis.final_url.clone()
            } else {
                url
            };

            let domains = classify_domains(&analysis.vector, &config.limits)
                .map_err(|e| CrawlError::InvalidConfig(e.to_string()))?;
            let relevant = !domains.is_empty();
            if relevant {
                let record = PageRecord {
                    url: page_url.to_string(),
                    digest: analysis.digest,
                    scores: analysis.vector,
                    domains: domains.iter().collect(),
                    fetched_at: analysis.fetched_at,
                };
                sink.store(&record, &analysis.body)?;
                report.pages_stored += 1;
                for d in domains.iter() {
                    report.per_domain_stored[d].stored += 1;
                }
            }
            frontier.complete(page_url, level, relevant, analysis.links);
            for entry in frontier.take_discarded() {
                sink.discard(&entry)?;
                report.urls_discarded += 1;
            }
        }
    }
    sink.finish()?;
    Ok(CrawlOutcome {
        report,
        elapsed: started.elapsed(),
    })
}
