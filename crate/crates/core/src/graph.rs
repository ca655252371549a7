//! The domain graph: harvested pages bucketed by the exact set of domains
//! they are relevant to.
//!
//! One node database per domain holds single-domain pages, one edge database
//! per domain pair holds two-domain pages, and the space node holds pages
//! relevant to every domain. The space edges carry the space node's page
//! count. With more than three domains, pages relevant to between three and
//! N-1 domains go into hyper-edge buckets keyed by their domain set.
//!
//! Databases hold record ids (positions in the page repository), not copies.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::DomainSet;
use crate::relevance::{classify_domains, RelevanceLimits};
use crate::repository::{read_records, PageRecord, RepositoryError};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("record {record} names domain {domain}, but there are only {domains} domains")]
    DomainOutOfRange { record: usize, domain: usize, domains: usize },
    #[error("record {0} is not relevant to any domain")]
    NoDomains(usize),
    #[error("record {record} has {scores} scores for {domains} domains")]
    ScoreLength { record: usize, scores: usize, domains: usize },
    #[error(transparent)]
    Repository(#[from] RepositoryError),
    #[error("graph file: {0}")]
    Format(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bucket {
    Node(usize),
    Edge(usize, usize),
    Space,
    Hyper,
}

/// Where a page relevant to `domains` (non-empty) belongs among `n` domains.
pub fn bucket_of(domains: DomainSet, n: usize) -> Bucket {
    let mut members = domains.iter();
    match domains.len() {
        1 => Bucket::Node(members.next().unwrap()),
        2 => Bucket::Edge(members.next().unwrap(), members.next().unwrap()),
        k if k == n => Bucket::Space,
        _ => Bucket::Hyper,
    }
}

/// How a query's domain selection picks databases.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Semantics {
    /// Every database whose domain set shares a domain with the selection.
    #[default]
    Intersect,
    /// Only databases whose domain set lies inside the selection.
    Contain,
}

impl std::str::FromStr for Semantics {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "intersect" => Ok(Semantics::Intersect),
            "contain" => Ok(Semantics::Contain),
            other => Err(format!("unknown semantics {other:?} (expected intersect or contain)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainGraph {
    domain_count: usize,
    buckets: BTreeMap<DomainSet, Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeCount {
    pub domains: [usize; 2],
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    /// Distinct relevant pages.
    pub m: u64,
    /// Pages relevant to each domain, counting multi-domain pages once per domain.
    pub per_domain: Vec<u64>,
    pub nodes: Vec<u64>,
    pub edges: Vec<EdgeCount>,
    pub space: u64,
    pub hyper: u64,
}

impl DomainGraph {
    pub fn empty(domain_count: usize) -> Self {
        DomainGraph {
            domain_count,
            buckets: BTreeMap::new(),
        }
    }

    /// Places each record by its stored domain set; record ids are slice
    /// positions.
    pub fn build(records: &[PageRecord], domain_count: usize) -> Result<Self, GraphError> {
        let mut sets = Vec::with_capacity(records.len());
        for (id, rec) in records.iter().enumerate() {
            if let Some(&domain) = rec.domains.iter().find(|&&d| d >= domain_count) {
                return Err(GraphError::DomainOutOfRange {
                    record: id,
                    domain,
                    domains: domain_count,
                });
            }
            sets.push((id, rec.domain_set()));
        }
        Self::from_memberships(sets, domain_count)
    }

    pub fn from_memberships(
        memberships: impl IntoIterator<Item = (usize, DomainSet)>,
        domain_count: usize,
    ) -> Result<Self, GraphError> {
        let mut graph = DomainGraph::empty(domain_count);
        for (id, set) in memberships {
            if set.is_empty() {
                return Err(GraphError::NoDomains(id));
            }
            if let Some(max) = set.max_index().filter(|&m| m >= domain_count) {
                return Err(GraphError::DomainOutOfRange {
                    record: id,
                    domain: max,
                    domains: domain_count,
                });
            }
            graph.buckets.entry(set).or_default().push(id);
        }
        for ids in graph.buckets.values_mut() {
            ids.sort_unstable();
            ids.dedup();
        }
        Ok(graph)
    }

    pub fn domain_count(&self) -> usize {
        self.domain_count
    }

    fn ids_where(&self, pred: impl Fn(Bucket) -> bool) -> Vec<usize> {
        let mut ids: Vec<usize> = self
            .buckets
            .iter()
            .filter(|(set, _)| pred(bucket_of(**set, self.domain_count)))
            .flat_map(|(_, ids)| ids.iter().copied())
            .collect();
        ids.sort_unstable();
        ids
    }

    pub fn node(&self, domain: usize) -> Vec<usize> {
        self.ids_where(|b| b == Bucket::Node(domain))
    }

    pub fn edge(&self, a: usize, b: usize) -> Vec<usize> {
        let (a, b) = (a.min(b), a.max(b));
        self.ids_where(|bk| bk == Bucket::Edge(a, b))
    }

    pub fn space(&self) -> Vec<usize> {
        self.ids_where(|b| b == Bucket::Space)
    }

    pub fn space_edge_weight(&self) -> u64 {
        self.space().len() as u64
    }

    pub fn hyper_edges(&self) -> Vec<(DomainSet, Vec<usize>)> {
        self.buckets
            .iter()
            .filter(|(set, _)| bucket_of(**set, self.domain_count) == Bucket::Hyper)
            .map(|(set, ids)| (*set, ids.clone()))
            .collect()
    }

    /// Every bucket keyed by its exact domain set.
    pub fn buckets(&self) -> impl Iterator<Item = (DomainSet, &[usize])> {
        self.buckets.iter().map(|(s, ids)| (*s, ids.as_slice()))
    }

    pub fn domains_of(&self, id: usize) -> Option<DomainSet> {
        self.buckets
            .iter()
            .find(|(_, ids)| ids.binary_search(&id).is_ok())
            .map(|(s, _)| *s)
    }

    /// Record ids from every database selected by `selected` under `semantics`.
    pub fn candidates(&self, selected: DomainSet, semantics: Semantics) -> Vec<usize> {
        let mut ids: Vec<usize> = self
            .buckets
            .iter()
            .filter(|(set, _)| match semantics {
                Semantics::Intersect => set.intersects(selected),
                Semantics::Contain => set.is_subset_of(selected),
            })
            .flat_map(|(_, ids)| ids.iter().copied())
            .collect();
        ids.sort_unstable();
        ids
    }

    pub fn stats(&self) -> GraphStats {
        let n = self.domain_count;
        let mut per_domain = vec![0u64; n];
        let mut m = 0u64;
        for (set, ids) in &self.buckets {
            m += ids.len() as u64;
            for d in set.iter() {
                per_domain[d] += ids.len() as u64;
            }
        }
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                edges.push(EdgeCount {
                    domains: [a, b],
                    count: self.edge(a, b).len() as u64,
                });
            }
        }
        GraphStats {
            m,
            per_domain,
            nodes: (0..n).map(|d| self.node(d).len() as u64).collect(),
            edges,
            space: self.space_edge_weight(),
            hyper: self.hyper_edges().iter().map(|(_, ids)| ids.len() as u64).sum(),
        }
    }

    pub fn to_file(&self, domain_names: &[String]) -> GraphFile {
        let n = self.domain_count;
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                let pages = self.edge(a, b);
                edges.push(SetEntry {
                    domains: vec![a, b],
                    count: pages.len() as u64,
                    pages,
                });
            }
        }
        GraphFile {
            domains: domain_names.to_vec(),
            nodes: (0..n)
                .map(|d| {
                    let pages = self.node(d);
                    SetEntry {
                        domains: vec![d],
                        count: pages.len() as u64,
                        pages,
                    }
                })
                .collect(),
            edges,
            hyper: self
                .hyper_edges()
                .into_iter()
                .map(|(set, pages)| SetEntry {
                    domains: set.iter().collect(),
                    count: pages.len() as u64,
                    pages,
                })
                .collect(),
            space: self.space(),
            space_edge_weight: self.space_edge_weight(),
            stats: self.stats(),
        }
    }

    pub fn from_file(file: &GraphFile) -> Result<Self, GraphError> {
        let n = file.domains.len();
        let mut memberships = Vec::new();
        for entry in file.nodes.iter().chain(&file.edges).chain(&file.hyper) {
            let set: DomainSet = entry.domains.iter().copied().collect();
            memberships.extend(entry.pages.iter().map(|&id| (id, set)));
        }
        memberships.extend(file.space.iter().map(|&id| (id, DomainSet::full(n))));
        let graph = Self::from_memberships(memberships, n)?;
        if graph.space_edge_weight() != file.space_edge_weight {
            return Err(GraphError::Format(format!(
                "space_edge_weight {} does not match {} space pages",
                file.space_edge_weight,
                graph.space_edge_weight()
            )));
        }
        Ok(graph)
    }

    /// Writes the graph as JSON, replacing any previous file atomically.
    pub fn save(&self, path: &Path, domain_names: &[String]) -> Result<(), GraphError> {
        let json = serde_json::to_string_pretty(&self.to_file(domain_names)).expect("graph serializes");
        let tmp = path.with_extension("json.tmp");
        let io = |source| {
            GraphError::Repository(RepositoryError::Io {
                path: path.to_owned(),
                source,
            })
        };
        std::fs::write(&tmp, json + "\n").map_err(io)?;
        std::fs::rename(&tmp, path).map_err(io)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<String>), GraphError> {
        let raw = std::fs::read_to_string(path).map_err(|source| {
            GraphError::Repository(RepositoryError::Io {
                path: path.to_owned(),
                source,
            })
        })?;
        let file: GraphFile = serde_json::from_str(&raw).map_err(|e| GraphError::Format(e.to_string()))?;
        Ok((Self::from_file(&file)?, file.domains))
    }
}

/// On-disk form of the graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFile {
    pub domains: Vec<String>,
    pub nodes: Vec<SetEntry>,
    pub edges: Vec<SetEntry>,
    #[serde(default)]
    pub hyper: Vec<SetEntry>,
    pub space: Vec<usize>,
    pub space_edge_weight: u64,
    pub stats: GraphStats,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetEntry {
    pub domains: Vec<usize>,
    pub count: u64,
    pub pages: Vec<usize>,
}

/// Re-derives each stored page's domains from its saved scores under
/// `limits` and builds the graph. Pages that no longer clear any limit are
/// left out; record ids stay the repository line positions.
pub fn rebuild_from_repository(repo_path: &Path, limits: &RelevanceLimits) -> Result<DomainGraph, GraphError> {
    let records = read_records(repo_path)?;
    rebuild_from_records(&records, limits)
}

pub fn rebuild_from_records(records: &[PageRecord], limits: &RelevanceLimits) -> Result<DomainGraph, GraphError> {
    let n = limits.len();
    let mut memberships = Vec::new();
    for (id, rec) in records.iter().enumerate() {
        let set = classify_domains(&rec.scores, limits).map_err(|_| GraphError::ScoreLength {
            record: id,
            scores: rec.scores.len(),
            domains: n,
        })?;
        if !set.is_empty() {
            memberships.push((id, set));
        }
    }
    DomainGraph::from_memberships(memberships, n)
}
