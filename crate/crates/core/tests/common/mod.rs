#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ontocrawl::ontology::{DomainId, SynTable, WeightTable};
use ontocrawl::relevance::PageText;
use ontocrawl::repository::Layout;
use ontocrawl::{normalize_term, AppConfig, DomainOntology, OntologySet, Term, Weight};
use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::Rng;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// Loads a fixture config and points its output at `out`.
pub fn fixture_config(rel: &str, out: &Path) -> AppConfig {
    let mut cfg = AppConfig::load(&fixtures().join(rel)).expect("fixture config loads");
    cfg.layout = Layout::new(out);
    cfg
}

pub fn term(s: &str) -> Term {
    normalize_term(s).unwrap()
}

/// Small vocabulary so random domains share terms and pages actually hit.
const WORDS: &[&str] = &[
    "ball", "bat", "wicket", "goal", "pitch", "umpire", "stick", "puck", "run", "out", "over", "match", "test",
    "club", "team", "kick", "save", "net", "ice", "field", "score", "game", "player", "coach", "fan",
];

fn random_term(rng: &mut StdRng) -> Term {
    let len = match rng.random_range(0..10) {
        0..=6 => 1,
        7..=8 => 2,
        _ => 3,
    };
    let words: Vec<&str> = (0..len).map(|_| *WORDS.choose(rng).unwrap()).collect();
    term(&words.join(" "))
}

pub fn random_domain(rng: &mut StdRng, index: usize, max_terms: usize) -> DomainOntology {
    let mut weights = WeightTable::new();
    let count = rng.random_range(1..=max_terms);
    while weights.len() < count {
        weights.insert(random_term(rng), Weight::from_milli(rng.random_range(1..=1000)).unwrap());
    }
    let mut synonyms = SynTable::new();
    for head in weights.keys() {
        if rng.random_bool(0.3) {
            let mut syns: Vec<Term> = (0..rng.random_range(1..=3)).map(|_| random_term(rng)).filter(|s| s != head).collect();
            syns.sort();
            syns.dedup();
            if !syns.is_empty() {
                synonyms.insert(head.clone(), syns);
            }
        }
    }
    let id = DomainId {
        index,
        name: format!("d{index}"),
    };
    DomainOntology::new(id, weights, synonyms).unwrap()
}

pub fn random_set(rng: &mut StdRng, n: usize, max_terms: usize) -> OntologySet {
    OntologySet::new((0..n).map(|i| random_domain(rng, i, max_terms)).collect()).unwrap()
}

pub fn random_page(rng: &mut StdRng, max_tokens: usize) -> PageText {
    let len = rng.random_range(0..=max_tokens);
    let tokens = (0..len)
        .map(|_| {
            if rng.random_bool(0.8) {
                WORDS.choose(rng).unwrap().to_string()
            } else {
                format!("noise{}", rng.random_range(0..50))
            }
        })
        .collect();
    PageText::new("http://random.test/", tokens)
}

/// Greedy left-to-right, non-overlapping, word-aligned match count.
pub fn oracle_count(term: &Term, tokens: &[String]) -> u64 {
    let words: Vec<&str> = term.as_str().split(' ').collect();
    let mut i = 0;
    let mut hits = 0;
    while i + words.len() <= tokens.len() {
        if tokens[i..i + words.len()].iter().zip(&words).all(|(a, b)| a == b) {
            hits += 1;
            i += words.len();
        } else {
            i += 1;
        }
    }
    hits
}

/// Per-domain weighted sum written independently of the library scorers.
pub fn oracle_scores(set: &OntologySet, page: &PageText) -> Vec<u64> {
    set.domains()
        .iter()
        .map(|d| {
            d.weights()
                .iter()
                .map(|(t, w)| {
                    let syn_hits: u64 = d.synonyms_of(t).iter().map(|s| oracle_count(s, &page.tokens)).sum();
                    (oracle_count(t, &page.tokens) + syn_hits) * w.milli()
                })
                .sum()
        })
        .collect()
}

pub fn read_lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect()
}

pub fn golden() -> BTreeMap<String, BTreeMap<String, u64>> {
    let raw = std::fs::read_to_string(fixtures().join("pages/golden.json")).unwrap();
    serde_json::from_str(&raw).unwrap()
}
