//! Single-domain versus multi-domain crawl comparison over one corpus.
//!
//! Runs one crawl per domain using only that domain's ontology, plus one
//! crawl with every ontology, all with the same seeds, budget and tolerance.
//! Fetches are sequential so timings are comparable.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::crawler::{crawl, CrawlConfig, CrawlError};
use crate::fetch::FetchMode;
use crate::graph::{DomainGraph, GraphStats};
use crate::ontology::OntologySet;
use crate::repository::MemorySink;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    /// Domain names whose ontologies the run used.
    pub subset: Vec<String>,
    pub pages_fetched: u64,
    pub pages_stored: u64,
    pub elapsed_ms: f64,
    /// Stored pages per domain, indexed like the full set; `None` for
    /// domains the run did not score.
    pub per_domain_stored: Vec<Option<u64>>,
    pub stored_urls: BTreeSet<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonChecks {
    pub multi_superset_of_each_single: bool,
    pub multi_faster_than_single_sum: bool,
    pub m_within_domain_sum: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub domains: Vec<String>,
    /// The multi-domain run first, then one row per domain.
    pub rows: Vec<ComparisonRow>,
    /// Page distribution of the multi-domain run.
    pub distribution: GraphStats,
    pub checks: ComparisonChecks,
}

impl ComparisonReport {
    pub fn multi(&self) -> &ComparisonRow {
        &self.rows[0]
    }

    pub fn singles(&self) -> &[ComparisonRow] {
        &self.rows[1..]
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["subset".to_owned(), "pages_fetched".into(), "pages_stored".into(), "elapsed_ms".into()];
        header.extend(self.domains.iter().cloned());
        w.write_record(&header).expect("in-memory csv");
        for row in &self.rows {
            let mut rec = vec![
                row.subset.join("+"),
                row.pages_fetched.to_string(),
                row.pages_stored.to_string(),
                format!("{:.3}", row.elapsed_ms),
            ];
            rec.extend(row.per_domain_stored.iter().map(|c| c.map(|c| c.to_string()).unwrap_or_default()));
            w.write_record(&rec).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
    }
}

async fn run(config: &CrawlConfig, set: &OntologySet, subset: Vec<String>, domain_map: &[usize], n: usize) -> Result<(ComparisonRow, MemorySink), CrawlError> {
    let mut sink = MemorySink::default();
    let outcome = crawl(config, set, &mut sink).await?;
    let mut per_domain_stored = vec![None; n];
    for (local, &global) in domain_map.iter().enumerate() {
        per_domain_stored[global] = Some(outcome.report.per_domain_stored[local].stored);
    }
    let row = ComparisonRow {
        subset,
        pages_fetched: outcome.report.pages_fetched,
        pages_stored: outcome.report.pages_stored,
        elapsed_ms: outcome.elapsed.as_secs_f64() * 1000.0,
        per_domain_stored,
        stored_urls: sink.records.iter().map(|r| r.url.clone()).collect(),
    };
    Ok((row, sink))
}

pub async fn run_comparison(config: &CrawlConfig, set: &OntologySet) -> Result<ComparisonReport, CrawlError> {
    if !matches!(config.fetch, FetchMode::Corpus { .. }) {
        return Err(CrawlError::InvalidConfig("comparison runs need corpus mode".into()));
    }
    config.validate(set)?;
    let n = set.len();
    let names = set.names();
    let sequential = CrawlConfig {
        max_concurrent_fetches: 1,
        ..config.clone()
    };

    let all: Vec<usize> = (0..n).collect();
    let (multi, sink) = run(&sequential, set, names.clone(), &all, n).await?;
    let distribution = DomainGraph::build(&sink.records, n)
        .map_err(|e| CrawlError::InvalidConfig(e.to_string()))?
        .stats();

    let mut rows = vec![multi];
    for (d, name) in names.iter().enumerate() {
        let single_cfg = CrawlConfig {
            limits: config.limits.only(d),
            ..sequential.clone()
        };
        let (row, _) = run(&single_cfg, &set.restrict_to(d), vec![name.clone()], &[d], n).await?;
        rows.push(row);
    }

    let multi = &rows[0];
    let singles = &rows[1..];
    let checks = ComparisonChecks {
        multi_superset_of_each_single: singles.iter().all(|s| s.stored_urls.is_subset(&multi.stored_urls)),
        multi_faster_than_single_sum: multi.elapsed_ms < singles.iter().map(|s| s.elapsed_ms).sum::<f64>(),
        m_within_domain_sum: distribution.m <= distribution.per_domain.iter().sum(),
    };
    Ok(ComparisonReport {
        domains: names,
        rows,
        distribution,
        checks,
    })
}
