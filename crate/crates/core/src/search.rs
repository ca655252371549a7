//! Domain-scoped search over the graph.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DomainGraph, GraphError, Semantics};
use crate::html::extract_text;
use crate::ontology::{format_milli, normalize_term, DomainSet, Term};
use crate::relevance::{count_occurrences, PageText};
use crate::repository::{read_cached_html, read_records, Layout, PageRecord, RepositoryError};
use crate::text::tokenize;

pub const DEFAULT_LIMIT: usize = 20;
pub const MAX_LIMIT: usize = 500;
const SNIPPET_RADIUS: usize = 8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SearchError {
    #[error("query has no searchable terms")]
    EmptyQuery,
    #[error("select at least one domain")]
    NoDomainSelected,
    #[error("unknown domain {0:?}")]
    UnknownDomain(String),
    #[error("limit must be between 1 and {MAX_LIMIT}")]
    InvalidLimit,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub raw: String,
    pub terms: Vec<Term>,
    pub selected: DomainSet,
    pub semantics: Semantics,
}

/// Splits a query into terms. Double-quoted spans become one multiword
/// term; everything else is split into single-word terms.
pub fn parse_query(raw: &str, selected: DomainSet) -> Result<Query, SearchError> {
    if selected.is_empty() {
        return Err(SearchError::NoDomainSelected);
    }
    let mut terms = Vec::new();
    for (i, part) in raw.split('"').enumerate() {
        let words = tokenize(part);
        if i % 2 == 1 {
            if let Ok(t) = normalize_term(&words.join(" ")) {
                terms.push(t);
            }
        } else {
            terms.extend(words.iter().filter_map(|w| normalize_term(w).ok()));
        }
    }
    if terms.is_empty() {
        return Err(SearchError::EmptyQuery);
    }
    Ok(Query {
        raw: raw.to_owned(),
        terms,
        selected,
        semantics: Semantics::default(),
    })
}

pub fn candidate_pages(graph: &DomainGraph, selected: DomainSet, semantics: Semantics) -> Vec<usize> {
    graph.candidates(selected, semantics)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchResult {
    pub url: String,
    pub match_score: u64,
    /// `(domain index, milli score)` for the selected domains.
    pub per_domain_scores: Vec<(usize, u64)>,
    pub snippet: String,
}

fn first_match(words: &[String], tokens: &[String]) -> Option<usize> {
    if words.is_empty() {
        return None;
    }
    tokens.windows(words.len()).position(|w| w == words)
}

fn snippet(q: &Query, tokens: &[String]) -> String {
    let first = q
        .terms
        .iter()
        .filter_map(|t| {
            let words = t.words();
            first_match(&words, tokens).map(|p| (p, words.len()))
        })
        .min();
    let Some((pos, len)) = first else { return String::new() };
    let start = pos.saturating_sub(SNIPPET_RADIUS);
    let end = (pos + len + SNIPPET_RADIUS).min(tokens.len());
    tokens[start..end].join(" ")
}

/// Scores each candidate as `1000 * query hits + sum of its stored scores
/// over the selected domains`, drops pages without hits, and sorts by score
/// descending then URL ascending.
pub fn rank_results<'a>(
    q: &Query,
    candidates: impl IntoIterator<Item = (&'a PageRecord, &'a PageText)>,
) -> Vec<SearchResult> {
    let mut results: Vec<SearchResult> = candidates
        .into_iter()
        .filter_map(|(record, text)| {
            let hits: u64 = q.terms.iter().map(|t| count_occurrences(t, text)).sum();
            if hits == 0 {
                return None;
            }
            let per_domain: Vec<(usize, u64)> = q
                .selected
                .iter()
                .filter(|&d| d < record.scores.len())
                .map(|d| (d, record.scores.get(d)))
                .collect();
            let relevance: u64 = per_domain.iter().map(|(_, s)| s).sum();
            Some(SearchResult {
                url: record.url.clone(),
                match_score: hits * 1000 + relevance,
                per_domain_scores: per_domain,
                snippet: snippet(q, &text.tokens),
            })
        })
        .collect();
    results.sort_by(|a, b| b.match_score.cmp(&a.match_score).then_with(|| a.url.cmp(&b.url)));
    results
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchRequest {
    pub query: String,
    pub domains: Vec<String>,
    #[serde(default)]
    pub semantics: Semantics,
    #[serde(default = "default_limit")]
    pub limit: usize,
}

fn default_limit() -> usize {
    DEFAULT_LIMIT
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainScore {
    pub domain: String,
    pub index: usize,
    pub milli: u64,
    pub score: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultEntry {
    pub url: String,
    pub match_score: u64,
    pub match_score_decimal: String,
    pub per_domain_scores: Vec<DomainScore>,
    pub snippet: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResponse {
    pub results: Vec<ResultEntry>,
}

#[derive(Debug, Error)]
pub enum IndexError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Repository(#[from] RepositoryError),
    #[error("graph references record {0}, which is not in the repository")]
    MissingRecord(usize),
}

/// An immutable snapshot of the graph, the repository and page text.
#[derive(Clone, Debug)]
pub struct SearchIndex {
    names: Vec<String>,
    graph: DomainGraph,
    records: Vec<PageRecord>,
    texts: Vec<PageText>,
}

impl SearchIndex {
    pub fn new(names: Vec<String>, graph: DomainGraph, records: Vec<PageRecord>, texts: Vec<PageText>) -> Self {
        SearchIndex {
            names,
            graph,
            records,
            texts,
        }
    }

    /// Loads `graph.json`, `pages.jsonl` and cached HTML from an output
    /// directory.
    pub fn load(layout: &Layout) -> Result<Self, IndexError> {
        let (graph, names) = DomainGraph::load(&layout.graph())?;
        let records = read_records(&layout.pages())?;
        let texts = records
            .iter()
            .map(|r| match read_cached_html(layout, &r.digest) {
                Ok(html) => extract_text(&html, &r.url),
                Err(e) => {
                    tracing::warn!(url = %r.url, error = %e, "cached html missing");
                    PageText::new(r.url.clone(), Vec::new())
                }
            })
            .collect();
        let index = SearchIndex::new(names, graph, records, texts);
        if let Some(id) = index.graph.buckets().flat_map(|(_, ids)| ids.iter()).find(|&&id| id >= index.records.len()) {
            return Err(IndexError::MissingRecord(*id));
        }
        Ok(index)
    }

    pub fn load_dir(dir: &Path) -> Result<Self, IndexError> {
        Self::load(&Layout::new(dir))
    }

    pub fn domain_names(&self) -> &[String] {
        &self.names
    }

    pub fn graph(&self) -> &DomainGraph {
        &self.graph
    }

    pub fn records(&self) -> &[PageRecord] {
        &self.records
    }

    pub fn resolve_domains(&self, names: &[String]) -> Result<DomainSet, SearchError> {
        if names.is_empty() {
            return Err(SearchError::NoDomainSelected);
        }
        let mut set = DomainSet::EMPTY;
        for name in names {
            let wanted = name.trim().to_lowercase();
            let idx = self
                .names
                .iter()
                .position(|n| n.to_lowercase() == wanted)
                .ok_or_else(|| SearchError::UnknownDomain(name.clone()))?;
            set.insert(idx);
        }
        Ok(set)
    }

    /// The single search path shared by the CLI and the HTTP API.
    pub fn search(&self, req: &SearchRequest) -> Result<SearchResponse, SearchError> {
        let selected = self.resolve_domains(&req.domains)?;
        if req.limit == 0 || req.limit > MAX_LIMIT {
            return Err(SearchError::InvalidLimit);
        }
        let mut query = parse_query(&req.query, selected)?;
        query.semantics = req.semantics;
        let ids = candidate_pages(&self.graph, selected, req.semantics);
        let ranked = rank_results(&query, ids.iter().map(|&id| (&self.records[id], &self.texts[id])));
        let results = ranked
            .into_iter()
            .take(req.limit)
            .map(|r| ResultEntry {
                match_score_decimal: format_milli(r.match_score),
                per_domain_scores: r
                    .per_domain_scores
                    .iter()
                    .map(|&(index, milli)| DomainScore {
                        domain: self.names[index].clone(),
                        index,
                        milli,
                        score: format_milli(milli),
                    })
                    .collect(),
                url: r.url,
                match_score: r.match_score,
                snippet: r.snippet,
            })
            .collect();
        Ok(SearchResponse { results })
    }
}
