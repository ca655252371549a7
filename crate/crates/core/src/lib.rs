//! Multi-domain focused crawling driven by weighted term ontologies.
//!
//! Pages are scored against several domain ontologies at once, relevant pages
//! are harvested into a repository, the repository is partitioned into a
//! domain graph, and domain-scoped queries are answered over that graph.

pub mod compare;
pub mod config;
pub mod crawler;
pub mod fetch;
pub mod graph;
pub mod html;
pub mod ontology;
pub mod relevance;
pub mod repository;
pub mod search;
pub mod server;
pub mod text;
pub mod urlnorm;

pub use config::{AppConfig, ConfigError};
pub use crawler::{crawl, crawl_to_dir, CrawlConfig, CrawlError, CrawlOutcome, CrawlReport};
pub use graph::{DomainGraph, GraphStats, Semantics};
pub use ontology::{normalize_term, DomainId, DomainOntology, DomainSet, OntologySet, Term, TermPartition, Weight};
pub use relevance::{
    classify_domains, count_occurrences, score_naive, score_partitioned, PageText, RelevanceLimits, RelevanceVector,
    Scorer,
};
pub use repository::{Layout, PageRecord};
pub use search::{SearchIndex, SearchRequest, SearchResponse};
