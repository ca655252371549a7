//! Domain ontologies: per-domain weight tables and synonym tables.
//!
//! Each domain is described by a flat table of weighted terms plus an optional
//! synonym table. Weights are fixed-point milli-units so every score computed
//! from them is an exact integer.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::text;

/// Upper bound on the number of domains, imposed by the `DomainSet` bitmask.
pub const MAX_DOMAINS: usize = 64;

#[derive(Debug, Error)]
pub enum OntologyError {
    #[error("term is empty after normalization")]
    EmptyTerm,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: weight {value:?} outside (0, 1]")]
    WeightOutOfRange { line: usize, value: String },
    #[error("duplicate term {0:?}")]
    DuplicateTerm(String),
    #[error("synonym table head term {0:?} is not in the weight table")]
    UnknownHeadTerm(String),
    #[error("term {0:?} lists itself as a synonym")]
    SelfSynonym(String),
    #[error("weight table is empty")]
    EmptyWeights,
    #[error("duplicate domain name {0:?}")]
    DuplicateDomain(String),
    #[error("domain ids must be contiguous from 0 (found {found} at position {position})")]
    NonContiguousIds { position: usize, found: usize },
    #[error("an ontology set needs at least one domain")]
    NoDomains,
    #[error("at most {MAX_DOMAINS} domains are supported")]
    TooManyDomains,
    #[error("domain {domain:?}: {source}")]
    InDomain {
        domain: String,
        #[source]
        source: Box<OntologyError>,
    },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// A normalized ontology term: lowercased with whitespace runs collapsed.
/// Terms may span several words ("test match").
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term(String);

impl Term {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The word tokens this term matches against, using the same tokenizer
    /// as page text.
    pub fn words(&self) -> Vec<String> {
        text::tokenize(&self.0)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn normalize_term(raw: &str) -> Result<Term, OntologyError> {
    let collapsed = raw.split_whitespace().collect::<Vec<_>>().join(" ");
    if collapsed.is_empty() {
        return Err(OntologyError::EmptyTerm);
    }
    Ok(Term(collapsed.to_lowercase()))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DomainId {
    pub index: usize,
    pub name: String,
}

/// Parses a non-negative decimal with at most three significant fractional
/// digits into milli-units. Exact; never goes through floating point.
pub fn parse_milli(raw: &str) -> Option<u64> {
    let s = raw.trim();
    let (int_part, frac_part) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    if s.ends_with('.') {
        return None;
    }
    let (kept, rest) = frac_part.split_at(frac_part.len().min(3));
    if rest.chars().any(|c| c != '0') {
        return None;
    }
    let int: u64 = if int_part.is_empty() { 0 } else { int_part.parse().ok()? };
    let mut frac: u64 = if kept.is_empty() { 0 } else { kept.parse().ok()? };
    for _ in kept.len()..3 {
        frac *= 10;
    }
    int.checked_mul(1000)?.checked_add(frac)
}

/// Renders milli-units as a decimal with exactly three fractional digits.
pub fn format_milli(milli: u64) -> String {
    format!("{}.{:03}", milli / 1000, milli % 1000)
}

/// A term weight in (0, 1], stored as milli-units 1..=1000.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Weight(u16);

impl Weight {
    pub fn from_milli(milli: u64) -> Option<Weight> {
        (1..=1000).contains(&milli).then_some(Weight(milli as u16))
    }

    pub fn milli(self) -> u64 {
        self.0 as u64
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_milli(self.milli()))
    }
}

pub type WeightTable = BTreeMap<Term, Weight>;
pub type SynTable = BTreeMap<Term, Vec<Term>>;

/// Yields `(line_number, fields)` for each data row of a tab-separated file,
/// skipping blank lines and `#` comments.
fn tsv_rows<R: Read>(reader: R) -> impl Iterator<Item = Result<(usize, Vec<String>), OntologyError>> {
    BufReader::new(reader)
        .lines()
        .enumerate()
        .filter_map(|(idx, line)| {
            let line_no = idx + 1;
            let line = match line {
                Ok(l) => l,
                Err(e) => {
                    return Some(Err(OntologyError::Parse {
                        line: line_no,
                        message: e.to_string(),
                    }))
                }
            };
            let trimmed = line.trim_end_matches(['\r', '\n']);
            if trimmed.trim().is_empty() || trimmed.trim_start().starts_with('#') {
                return None;
            }
            Some(Ok((line_no, trimmed.split('\t').map(str::to_owned).collect())))
        })
}

fn two_columns(line: usize, fields: Vec<String>) -> Result<(String, String), OntologyError> {
    match <[String; 2]>::try_from(fields) {
        Ok([a, b]) => Ok((a, b)),
        Err(fields) => Err(OntologyError::Parse {
            line,
            message: format!("expected 2 tab-separated columns, found {}", fields.len()),
        }),
    }
}

fn row_term(line: usize, raw: &str) -> Result<Term, OntologyError> {
    normalize_term(raw).map_err(|_| OntologyError::Parse {
        line,
        message: "empty term".into(),
    })
}

/// Reads a `term<TAB>weight` table.
pub fn load_weight_table<R: Read>(reader: R) -> Result<WeightTable, OntologyError> {
    let mut table = WeightTable::new();
    for row in tsv_rows(reader) {
        let (line, fields) = row?;
        let (raw_term, raw_weight) = two_columns(line, fields)?;
        let term = row_term(line, &raw_term)?;
        let value = raw_weight.trim();
        let milli = parse_weight_value(value).ok_or_else(|| OntologyError::Parse {
            line,
            message: format!("{value:?} is not a decimal weight"),
        })?;
        let weight = milli.and_then(Weight::from_milli).ok_or_else(|| OntologyError::WeightOutOfRange {
            line,
            value: value.to_owned(),
        })?;
        if table.insert(term.clone(), weight).is_some() {
            return Err(OntologyError::DuplicateTerm(term.0));
        }
    }
    Ok(table)
}

/// `None` = not a number at all; `Some(None)` = numeric but not representable
/// as a weight (negative, or too precise/large to be in range).
fn parse_weight_value(value: &str) -> Option<Option<u64>> {
    if let Some(m) = parse_milli(value) {
        return Some(Some(m));
    }
    value.parse::<f64>().ok().map(|_| None)
}

pub fn serialize_weight_table(table: &WeightTable) -> String {
    let mut out = String::new();
    for (term, weight) in table {
        out.push_str(term.as_str());
        out.push('\t');
        out.push_str(&weight.to_string());
        out.push('\n');
    }
    out
}

/// Reads a `term<TAB>synonym` table. The literal `NA` means "no synonym";
/// repeated head terms accumulate.
pub fn load_syntable<R: Read>(reader: R, weights: &WeightTable) -> Result<SynTable, OntologyError> {
    let mut table = SynTable::new();
    for row in tsv_rows(reader) {
        let (line, fields) = row?;
        let (raw_head, raw_syn) = two_columns(line, fields)?;
        let head = row_term(line, &raw_head)?;
        if !weights.contains_key(&head) {
            return Err(OntologyError::UnknownHeadTerm(head.0));
        }
        let list = table.entry(head.clone()).or_default();
        if raw_syn.trim() == "NA" {
            continue;
        }
        let syn = row_term(line, &raw_syn)?;
        if syn == head {
            return Err(OntologyError::SelfSynonym(head.0));
        }
        if !list.contains(&syn) {
            list.push(syn);
        }
    }
    Ok(table)
}

#[derive(Clone, Debug)]
pub struct DomainOntology {
    id: DomainId,
    weights: WeightTable,
    synonyms: SynTable,
}

impl DomainOntology {
    pub fn new(id: DomainId, weights: WeightTable, synonyms: SynTable) -> Result<Self, OntologyError> {
        if weights.is_empty() {
            return Err(OntologyError::EmptyWeights);
        }
        for (head, syns) in &synonyms {
            if !weights.contains_key(head) {
                return Err(OntologyError::UnknownHeadTerm(head.0.clone()));
            }
            if syns.contains(head) {
                return Err(OntologyError::SelfSynonym(head.0.clone()));
            }
        }
        Ok(DomainOntology { id, weights, synonyms })
    }

    pub fn id(&self) -> &DomainId {
        &self.id
    }

    pub fn name(&self) -> &str {
        &self.id.name
    }

    pub fn weights(&self) -> &WeightTable {
        &self.weights
    }

    pub fn weight(&self, term: &Term) -> Option<Weight> {
        self.weights.get(term).copied()
    }

    pub fn synonyms(&self) -> &SynTable {
        &self.synonyms
    }

    pub fn synonyms_of(&self, term: &Term) -> &[Term] {
        self.synonyms.get(term).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// A set of domain indices, as a bitmask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DomainSet(u64);

impl DomainSet {
    pub const EMPTY: DomainSet = DomainSet(0);

    pub fn full(n: usize) -> DomainSet {
        debug_assert!(n <= MAX_DOMAINS);
        if n == MAX_DOMAINS {
            DomainSet(u64::MAX)
        } else {
            DomainSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(index: usize) -> DomainSet {
        DomainSet(1u64 << index)
    }

    pub fn from_bits(bits: u64) -> DomainSet {
        DomainSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn insert(&mut self, index: usize) {
        self.0 |= 1u64 << index;
    }

    pub fn contains(self, index: usize) -> bool {
        index < MAX_DOMAINS && self.0 & (1u64 << index) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn intersects(self, other: DomainSet) -> bool {
        self.0 & other.0 != 0
    }

    pub fn is_subset_of(self, other: DomainSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..MAX_DOMAINS).filter(move |&i| self.contains(i))
    }

    pub fn max_index(self) -> Option<usize> {
        (!self.is_empty()).then(|| 63 - self.0.leading_zeros() as usize)
    }
}

impl FromIterator<usize> for DomainSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut set = DomainSet::EMPTY;
        for i in iter {
            set.insert(i);
        }
        set
    }
}

#[derive(Clone, Debug)]
pub struct OntologySet {
    domains: Vec<DomainOntology>,
}

impl OntologySet {
    pub fn new(domains: Vec<DomainOntology>) -> Result<Self, OntologyError> {
        if domains.is_empty() {
            return Err(OntologyError::NoDomains);
        }
        if domains.len() > MAX_DOMAINS {
            return Err(OntologyError::TooManyDomains);
        }
        let mut names = BTreeSet::new();
        for (position, d) in domains.iter().enumerate() {
            if d.id.index != position {
                return Err(OntologyError::NonContiguousIds {
                    position,
                    found: d.id.index,
                });
            }
            if !names.insert(d.id.name.to_lowercase()) {
                return Err(OntologyError::DuplicateDomain(d.id.name.clone()));
            }
        }
        Ok(OntologySet { domains })
    }

    /// Loads every domain listed in a JSON manifest. Table paths are relative
    /// to the manifest's directory.
    pub fn load_manifest(path: &Path) -> Result<Self, OntologyError> {
        let raw = std::fs::read_to_string(path).map_err(|source| OntologyError::Io {
            path: path.to_owned(),
            source,
        })?;
        let manifest: Manifest = serde_json::from_str(&raw).map_err(|e| OntologyError::Manifest(e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut domains = Vec::with_capacity(manifest.domains.len());
        for (index, entry) in manifest.domains.into_iter().enumerate() {
            let name = entry.name.trim().to_owned();
            if name.is_empty() {
                return Err(OntologyError::Manifest(format!("domain {index} has an empty name")));
            }
            let wrap = |source| OntologyError::InDomain {
                domain: name.clone(),
                source: Box::new(source),
            };
            let weights = load_weight_table(open(&base.join(&entry.weights)).map_err(wrap)?).map_err(wrap)?;
            let synonyms = match &entry.synonyms {
                Some(p) => load_syntable(open(&base.join(p)).map_err(wrap)?, &weights).map_err(wrap)?,
                None => SynTable::new(),
            };
            let id = DomainId { index, name: name.clone() };
            domains.push(DomainOntology::new(id, weights, synonyms).map_err(wrap)?);
        }
        OntologySet::new(domains)
    }

    pub fn len(&self) -> usize {
        self.domains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domains.is_empty()
    }

    pub fn domains(&self) -> &[DomainOntology] {
        &self.domains
    }

    pub fn domain(&self, index: usize) -> &DomainOntology {
        &self.domains[index]
    }

    pub fn names(&self) -> Vec<String> {
        self.domains.iter().map(|d| d.id.name.clone()).collect()
    }

    /// Case-insensitive lookup by domain name.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        let wanted = name.trim().to_lowercase();
        self.domains.iter().position(|d| d.id.name.to_lowercase() == wanted)
    }

    /// A one-domain set containing only `index`, renumbered to 0.
    pub fn restrict_to(&self, index: usize) -> OntologySet {
        let mut only = self.domains[index].clone();
        only.id.index = 0;
        OntologySet { domains: vec![only] }
    }
}

#[derive(Deserialize)]
struct Manifest {
    domains: Vec<ManifestEntry>,
}

#[derive(Deserialize)]
struct ManifestEntry {
    name: String,
    weights: PathBuf,
    #[serde(default)]
    synonyms: Option<PathBuf>,
}

fn open(path: &Path) -> Result<std::fs::File, OntologyError> {
    std::fs::File::open(path).map_err(|source| OntologyError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Every ontology term grouped by the exact set of domains whose weight
/// tables contain it. For three domains the full set is the all-domain
/// class, pairs are the two-domain classes and singletons the rest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermPartition {
    classes: BTreeMap<DomainSet, BTreeSet<Term>>,
}

impl TermPartition {
    pub fn of(set: &OntologySet) -> TermPartition {
        let mut membership: BTreeMap<&Term, DomainSet> = BTreeMap::new();
        for d in set.domains() {
            for term in d.weights().keys() {
                membership.entry(term).or_default().insert(d.id().index);
            }
        }
        let mut classes: BTreeMap<DomainSet, BTreeSet<Term>> = BTreeMap::new();
        for (term, domains) in membership {
            classes.entry(domains).or_default().insert(term.clone());
        }
        TermPartition { classes }
    }

    pub fn class(&self, domains: DomainSet) -> Option<&BTreeSet<Term>> {
        self.classes.get(&domains)
    }

    /// Classes ordered widest first: shared terms before domain-specific ones.
    pub fn classes(&self) -> impl Iterator<Item = (DomainSet, &BTreeSet<Term>)> {
        let mut ordered: Vec<_> = self.classes.iter().map(|(k, v)| (*k, v)).collect();
        ordered.sort_by_key(|(k, _)| (std::cmp::Reverse(k.len()), *k));
        ordered.into_iter()
    }

    pub fn class_of(&self, term: &Term) -> Option<DomainSet> {
        self.classes.iter().find(|(_, terms)| terms.contains(term)).map(|(k, _)| *k)
    }

    pub fn term_count(&self) -> usize {
        self.classes.values().map(BTreeSet::len).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn term(s: &str) -> Term {
        normalize_term(s).unwrap()
    }

    fn domain(index: usize, name: &str, terms: &[(&str, u64)]) -> DomainOntology {
        let weights = terms.iter().map(|(t, w)| (term(t), Weight::from_milli(*w).unwrap())).collect();
        DomainOntology::new(
            DomainId {
                index,
                name: name.into(),
            },
            weights,
            SynTable::new(),
        )
        .unwrap()
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(term("Test  Match").as_str(), "test match");
        assert_eq!(term("Wicket").as_str(), "wicket");
        assert_eq!(term("  ball ").as_str(), "ball");
        assert!(matches!(normalize_term(" \t\n"), Err(OntologyError::EmptyTerm)));
        assert_eq!(term("ÉQUIPE\u{00a0}Nationale").as_str(), "équipe nationale");
    }

    #[test]
    fn weight_table_rows() {
        let t = load_weight_table("Wicket\t1.0\nCrease\t0.8\n# comment\n\nOne day Match\t0.4\n".as_bytes()).unwrap();
        assert_eq!(t[&term("wicket")].milli(), 1000);
        assert_eq!(t[&term("crease")].milli(), 800);
        assert_eq!(t[&term("one day match")].milli(), 400);
        assert_eq!(t.len(), 3);
    }

    #[test]
    fn weight_table_errors() {
        assert!(matches!(
            load_weight_table("Bat\t1.5\n".as_bytes()),
            Err(OntologyError::WeightOutOfRange { line: 1, .. })
        ));
        assert!(matches!(
            load_weight_table("Bat\t0\n".as_bytes()),
            Err(OntologyError::WeightOutOfRange { .. })
        ));
        assert!(matches!(
            load_weight_table("Bat\t-0.2\n".as_bytes()),
            Err(OntologyError::WeightOutOfRange { .. })
        ));
        assert!(matches!(
            load_weight_table("Bat\theavy\n".as_bytes()),
            Err(OntologyError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            load_weight_table("Bat 1.0\n".as_bytes()),
            Err(OntologyError::Parse { .. })
        ));
        assert!(matches!(
            load_weight_table("Bat\t1.0\nbat\t0.5\n".as_bytes()),
            Err(OntologyError::DuplicateTerm(_))
        ));
    }

    #[test]
    fn milli_parsing() {
        assert_eq!(parse_milli("1.0"), Some(1000));
        assert_eq!(parse_milli("0.25"), Some(250));
        assert_eq!(parse_milli(".5"), Some(500));
        assert_eq!(parse_milli("2"), Some(2000));
        assert_eq!(parse_milli("0.8000"), Some(800));
        assert_eq!(parse_milli("0.0005"), None);
        assert_eq!(parse_milli("1."), None);
        assert_eq!(parse_milli("-1"), None);
        assert_eq!(parse_milli(""), None);
        assert_eq!(format_milli(3000), "3.000");
        assert_eq!(format_milli(600), "0.600");
    }

    #[test]
    fn syntable_rows() {
        let weights = load_weight_table("Out\t0.6\nDraw\t0.1\nCenter\t0.2\n".as_bytes()).unwrap();
        let syn = load_syntable(
            "Out\tDismissed\nDraw\tNA\nCenter\tmiddle\nCenter\tMiddle\nOut\tCaught\n".as_bytes(),
            &weights,
        )
        .unwrap();
        assert_eq!(syn[&term("out")], vec![term("dismissed"), term("caught")]);
        assert!(syn[&term("draw")].is_empty());
        assert_eq!(syn[&term("center")], vec![term("middle")]);
    }

    #[test]
    fn syntable_errors() {
        let weights = load_weight_table("Out\t0.6\n".as_bytes()).unwrap();
        assert!(matches!(
            load_syntable("Stump\tpost\n".as_bytes(), &weights),
            Err(OntologyError::UnknownHeadTerm(_))
        ));
        assert!(matches!(
            load_syntable("Out\tOUT\n".as_bytes(), &weights),
            Err(OntologyError::SelfSynonym(_))
        ));
        assert!(matches!(
            load_syntable("Out\n".as_bytes(), &weights),
            Err(OntologyError::Parse { .. })
        ));
    }

    #[test]
    fn set_validation() {
        let a = domain(0, "Cricket", &[("bat", 1000)]);
        let b = domain(1, "cricket", &[("goal", 300)]);
        assert!(matches!(
            OntologySet::new(vec![a.clone(), b]),
            Err(OntologyError::DuplicateDomain(_))
        ));
        let skipped = domain(2, "hockey", &[("puck", 1000)]);
        assert!(matches!(
            OntologySet::new(vec![a, skipped]),
            Err(OntologyError::NonContiguousIds { .. })
        ));
        assert!(matches!(OntologySet::new(vec![]), Err(OntologyError::NoDomains)));
        assert!(matches!(
            DomainOntology::new(
                DomainId {
                    index: 0,
                    name: "x".into()
                },
                WeightTable::new(),
                SynTable::new()
            ),
            Err(OntologyError::EmptyWeights)
        ));
    }

    #[test]
    fn partition_three_domains() {
        let set = OntologySet::new(vec![
            domain(0, "cricket", &[("ball", 200), ("wicket", 1000), ("pitch", 300)]),
            domain(1, "football", &[("ball", 200), ("goal", 300), ("pitch", 300)]),
            domain(2, "hockey", &[("ball", 200), ("goal", 300), ("puck", 1000)]),
        ])
        .unwrap();
        let p = TermPartition::of(&set);
        assert_eq!(p.class_of(&term("ball")), Some(DomainSet::full(3)));
        assert_eq!(p.class_of(&term("wicket")), Some(DomainSet::singleton(0)));
        assert_eq!(p.class_of(&term("goal")), Some([1, 2].into_iter().collect()));
        assert_eq!(p.class_of(&term("pitch")), Some([0, 1].into_iter().collect()));
        assert_eq!(p.term_count(), 5);
        let first = p.classes().next().unwrap().0;
        assert_eq!(first, DomainSet::full(3));
    }

    #[test]
    fn partition_single_domain() {
        let set = OntologySet::new(vec![domain(0, "cricket", &[("bat", 1000), ("ball", 200)])]).unwrap();
        let p = TermPartition::of(&set);
        assert_eq!(p.classes().count(), 1);
        assert_eq!(p.class(DomainSet::singleton(0)).unwrap().len(), 2);
    }

    #[test]
    fn restrict_renumbers() {
        let set = OntologySet::new(vec![
            domain(0, "cricket", &[("bat", 1000)]),
            domain(1, "hockey", &[("puck", 1000)]),
        ])
        .unwrap();
        let only = set.restrict_to(1);
        assert_eq!(only.len(), 1);
        assert_eq!(only.domain(0).id().index, 0);
        assert_eq!(only.domain(0).name(), "hockey");
        assert_eq!(set.index_of("HOCKEY"), Some(1));
    }

    #[test]
    fn domain_set_ops() {
        let s: DomainSet = [0, 2].into_iter().collect();
        assert_eq!(s.len(), 2);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 2]);
        assert!(s.intersects(DomainSet::singleton(2)));
        assert!(!s.is_subset_of(DomainSet::singleton(2)));
        assert_eq!(s.max_index(), Some(2));
        assert_eq!(DomainSet::full(64).len(), 64);
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent(raw in "[ \tA-Za-zÀ-ÿ0-9]{0,24}") {
            if let Ok(once) = normalize_term(&raw) {
                prop_assert_eq!(normalize_term(once.as_str()).unwrap(), once.clone());
                prop_assert!(!once.as_str().starts_with(' ') && !once.as_str().ends_with(' '));
                prop_assert!(!once.as_str().contains("  "));
            } else {
                prop_assert!(raw.trim().is_empty());
            }
        }

        #[test]
        fn weight_table_round_trips(entries in proptest::collection::btree_map("[a-z]{1,8}( [a-z]{1,8})?", 1u64..=1000, 1..20)) {
            let table: WeightTable = entries.iter().map(|(t, w)| (term(t), Weight::from_milli(*w).unwrap())).collect();
            let text = serialize_weight_table(&table);
            let reloaded = load_weight_table(text.as_bytes()).unwrap();
            prop_assert_eq!(reloaded, table);
        }

        #[test]
        fn partition_covers_union(tables in proptest::collection::vec(proptest::collection::btree_set("[a-e]{1,2}", 1..10), 1..5)) {
            let domains = tables.iter().enumerate().map(|(i, terms)| {
                let weights = terms.iter().map(|t| (term(t), Weight::from_milli(100).unwrap())).collect();
                DomainOntology::new(DomainId { index: i, name: format!("d{i}") }, weights, SynTable::new()).unwrap()
            }).collect();
            let set = OntologySet::new(domains).unwrap();
            let p = TermPartition::of(&set);
            let union: BTreeSet<&String> = tables.iter().flatten().collect();
            prop_assert_eq!(p.term_count(), union.len());
            for t in union {
                let expected: DomainSet = tables.iter().enumerate().filter(|(_, ts)| ts.contains(t)).map(|(i, _)| i).collect();
                prop_assert_eq!(p.class_of(&term(t)), Some(expected));
            }
        }
    }
}
