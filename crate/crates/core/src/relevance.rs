//! Per-domain relevance scoring of page text.
//!
//! A domain's score is the sum, over its terms, of the term weight times the
//! number of occurrences of the term and of each of its synonyms. All scores
//! are exact integers in milli-units.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::{DomainSet, OntologySet, Term, TermPartition};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RelevanceError {
    #[error("score vector has {scores} entries but there are {limits} relevance limits")]
    LengthMismatch { scores: usize, limits: usize },
    #[error("relevance limit for domain {0} must be at least 0.001")]
    ZeroLimit(usize),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PageText {
    pub source_url: String,
    pub tokens: Vec<String>,
}

impl PageText {
    pub fn new(source_url: impl Into<String>, tokens: Vec<String>) -> Self {
        PageText {
            source_url: source_url.into(),
            tokens,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RelevanceVector(Vec<u64>);

impl RelevanceVector {
    pub fn zeros(n: usize) -> Self {
        RelevanceVector(vec![0; n])
    }

    pub fn from_milli(scores: Vec<u64>) -> Self {
        RelevanceVector(scores)
    }

    pub fn scores(&self) -> &[u64] {
        &self.0
    }

    pub fn get(&self, domain: usize) -> u64 {
        self.0[domain]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn add(&mut self, domain: usize, milli: u64) {
        self.0[domain] += milli;
    }
}

/// One threshold per domain; a page belongs to domain `i` when its score is
/// strictly greater than `limits[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelevanceLimits(Vec<u64>);

impl RelevanceLimits {
    pub fn new(limits: Vec<u64>) -> Result<Self, RelevanceError> {
        if let Some(i) = limits.iter().position(|&l| l == 0) {
            return Err(RelevanceError::ZeroLimit(i));
        }
        Ok(RelevanceLimits(limits))
    }

    pub fn uniform(n: usize, milli: u64) -> Result<Self, RelevanceError> {
        Self::new(vec![milli; n])
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The limit for one domain, as a one-element limit list.
    pub fn only(&self, domain: usize) -> RelevanceLimits {
        RelevanceLimits(vec![self.0[domain]])
    }
}

fn count_words(words: &[String], tokens: &[String]) -> u64 {
    let k = words.len();
    if k == 0 || k > tokens.len() {
        return 0;
    }
    let mut count = 0;
    let mut i = 0;
    while i + k <= tokens.len() {
        if tokens[i..i + k] == *words {
            count += 1;
            i += k;
        } else {
            i += 1;
        }
    }
    count
}

/// Non-overlapping, word-aligned occurrences of `term` in the page, scanning
/// left to right.
pub fn count_occurrences(term: &Term, page: &PageText) -> u64 {
    count_words(&term.words(), &page.tokens)
}

/// Straight per-domain sum over every term and synonym. Used as the
/// reference the partitioned scorer must agree with.
pub fn score_naive(page: &PageText, set: &OntologySet) -> RelevanceVector {
    let mut vec = RelevanceVector::zeros(set.len());
    for d in set.domains() {
        for (term, weight) in d.weights() {
            let mut hits = count_occurrences(term, page);
            for syn in d.synonyms_of(term) {
                hits += count_occurrences(syn, page);
            }
            vec.add(d.id().index, hits * weight.milli());
        }
    }
    vec
}

/// Scores by walking the term partition: each shared term is counted once
/// and the count is applied to every domain of its class, followed by a pass
/// over that domain's synonyms for the term.
pub fn score_partitioned(page: &PageText, set: &OntologySet, partition: &TermPartition) -> RelevanceVector {
    let mut vec = RelevanceVector::zeros(set.len());
    let mut synonym_counts: HashMap<&Term, u64> = HashMap::new();
    for (class, terms) in partition.classes() {
        for term in terms {
            let count = count_occurrences(term, page);
            for i in class.iter() {
                let domain = set.domain(i);
                let Some(weight) = domain.weight(term) else { continue };
                let mut hits = count;
                for syn in domain.synonyms_of(term) {
                    hits += *synonym_counts
                        .entry(syn)
                        .or_insert_with(|| count_occurrences(syn, page));
                }
                vec.add(i, hits * weight.milli());
            }
        }
    }
    vec
}

pub fn classify_domains(vec: &RelevanceVector, limits: &RelevanceLimits) -> Result<DomainSet, RelevanceError> {
    if vec.len() != limits.len() {
        return Err(RelevanceError::LengthMismatch {
            scores: vec.len(),
            limits: limits.len(),
        });
    }
    Ok(vec
        .scores()
        .iter()
        .zip(limits.as_slice())
        .enumerate()
        .filter(|(_, (score, limit))| score > limit)
        .map(|(i, _)| i)
        .collect())
}

/// An ontology set paired with its precomputed term partition.
#[derive(Clone, Debug)]
pub struct Scorer {
    set: OntologySet,
    partition: TermPartition,
}

impl Scorer {
    pub fn new(set: OntologySet) -> Self {
        let partition = TermPartition::of(&set);
        Scorer { set, partition }
    }

    pub fn set(&self) -> &OntologySet {
        &self.set
    }

    pub fn partition(&self) -> &TermPartition {
        &self.partition
    }

    pub fn score(&self, page: &PageText) -> RelevanceVector {
        score_partitioned(page, &self.set, &self.partition)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::{normalize_term, DomainId, DomainOntology, SynTable, Weight, WeightTable};
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_owned).collect()
    }

    fn page(s: &str) -> PageText {
        PageText::new("http://t/", toks(s))
    }

    fn term(s: &str) -> Term {
        normalize_term(s).unwrap()
    }

    /// Recursive restatement of greedy non-overlapping matching.
    fn oracle_count(words: &[String], tokens: &[String]) -> u64 {
        if words.is_empty() || tokens.len() < words.len() {
            return 0;
        }
        if tokens[..words.len()] == *words {
            1 + oracle_count(words, &tokens[words.len()..])
        } else {
            oracle_count(words, &tokens[1..])
        }
    }

    fn domain(index: usize, terms: &[(&str, u64)], syns: &[(&str, &[&str])]) -> DomainOntology {
        let weights: WeightTable = terms.iter().map(|(t, w)| (term(t), Weight::from_milli(*w).unwrap())).collect();
        let synonyms: SynTable = syns
            .iter()
            .map(|(h, ss)| (term(h), ss.iter().map(|s| term(s)).collect()))
            .collect();
        DomainOntology::new(
            DomainId {
                index,
                name: format!("d{index}"),
            },
            weights,
            synonyms,
        )
        .unwrap()
    }

    #[test]
    fn counting_examples() {
        let p = page("the wicket fell another wicket");
        assert_eq!(count_occurrences(&term("wicket"), &p), 2);
        assert_eq!(oracle_count(&toks("wicket"), &p.tokens), 2);
        let p = page("one day match one day");
        assert_eq!(count_occurrences(&term("one day"), &p), 2);
        assert_eq!(oracle_count(&toks("one day"), &p.tokens), 2);
        assert_eq!(count_occurrences(&term("bat"), &page("battle batter")), 0);
        // Non-overlapping: "a a a" holds one "a a".
        assert_eq!(count_occurrences(&term("a a"), &page("a a a")), 1);
        assert_eq!(count_occurrences(&term("a a"), &page("a a a a")), 2);
    }

    #[test]
    fn naive_examples() {
        let set = OntologySet::new(vec![domain(0, &[("wicket", 1000), ("bat", 1000)], &[])]).unwrap();
        assert_eq!(score_naive(&page("wicket bat wicket"), &set).scores(), [3000]);

        let set = OntologySet::new(vec![domain(0, &[("out", 600)], &[("out", &["dismissed"])])]).unwrap();
        assert_eq!(score_naive(&page("dismissed"), &set).scores(), [600]);

        let set = OntologySet::new(vec![domain(0, &[("bat", 1000)], &[]), domain(1, &[("goal", 300)], &[])]).unwrap();
        assert_eq!(score_naive(&page(""), &set).scores(), [0, 0]);
    }

    #[test]
    fn shared_term_updates_every_domain() {
        let set = OntologySet::new(vec![
            domain(0, &[("ball", 200), ("wicket", 1000)], &[]),
            domain(1, &[("ball", 200), ("goal", 300)], &[]),
            domain(2, &[("ball", 200), ("puck", 1000)], &[]),
        ])
        .unwrap();
        let scorer = Scorer::new(set.clone());
        let p = page("ball ball");
        assert_eq!(scorer.score(&p).scores(), [400, 400, 400]);
        assert_eq!(scorer.score(&p), score_naive(&p, &set));

        let only_cricket = page("wicket wicket");
        assert_eq!(scorer.score(&only_cricket).scores(), [2000, 0, 0]);
    }

    #[test]
    fn synonym_that_is_also_a_term_counts_in_both_roles() {
        let set = OntologySet::new(vec![
            domain(0, &[("out", 600), ("dismissed", 300)], &[("out", &["dismissed"])]),
            domain(1, &[("dismissed", 100)], &[]),
        ])
        .unwrap();
        let p = page("dismissed");
        let expected = [600 + 300, 100];
        assert_eq!(score_naive(&p, &set).scores(), expected);
        assert_eq!(Scorer::new(set).score(&p).scores(), expected);
    }

    #[test]
    fn classify_examples() {
        let limits = RelevanceLimits::uniform(3, 1000).unwrap();
        let v = RelevanceVector::from_milli(vec![3000, 0, 0]);
        assert_eq!(classify_domains(&v, &limits).unwrap(), DomainSet::singleton(0));
        let v = RelevanceVector::from_milli(vec![1000, 1000, 1000]);
        assert!(classify_domains(&v, &limits).unwrap().is_empty());
        let v = RelevanceVector::from_milli(vec![1001, 2000, 5000]);
        assert_eq!(classify_domains(&v, &limits).unwrap(), DomainSet::full(3));
        let short = RelevanceVector::from_milli(vec![1]);
        assert_eq!(
            classify_domains(&short, &limits),
            Err(RelevanceError::LengthMismatch { scores: 1, limits: 3 })
        );
        assert_eq!(RelevanceLimits::new(vec![5, 0]), Err(RelevanceError::ZeroLimit(1)));
    }

    const VOCAB: &[&str] = &["ball", "bat", "goal", "puck", "out", "one", "day", "match", "stick", "pad"];

    fn arb_words() -> impl Strategy<Value = String> {
        proptest::collection::vec(proptest::sample::select(VOCAB), 1..3).prop_map(|w| w.join(" "))
    }

    fn arb_set() -> impl Strategy<Value = OntologySet> {
        proptest::collection::vec(
            proptest::collection::btree_map(
                arb_words(),
                (1u64..=1000, proptest::collection::vec(arb_words(), 0..3)),
                1..8,
            ),
            1..5,
        )
        .prop_map(|domains| {
            let built = domains
                .into_iter()
                .enumerate()
                .map(|(i, entries)| {
                    let weights: WeightTable = entries
                        .iter()
                        .map(|(t, (w, _))| (term(t), Weight::from_milli(*w).unwrap()))
                        .collect();
                    let synonyms: SynTable = entries
                        .iter()
                        .map(|(t, (_, ss))| {
                            let head = term(t);
                            let mut list: Vec<Term> = ss.iter().map(|s| term(s)).filter(|s| *s != head).collect();
                            list.dedup();
                            (head, list)
                        })
                        .collect();
                    DomainOntology::new(
                        DomainId {
                            index: i,
                            name: format!("d{i}"),
                        },
                        weights,
                        synonyms,
                    )
                    .unwrap()
                })
                .collect();
            OntologySet::new(built).unwrap()
        })
    }

    fn arb_tokens() -> impl Strategy<Value = Vec<String>> {
        proptest::collection::vec(proptest::sample::select(VOCAB).prop_map(str::to_owned), 0..60)
    }

    proptest! {
        #[test]
        fn count_matches_recursive_oracle(words in proptest::collection::vec(proptest::sample::select(&["a", "b"][..]), 1..4), tokens in proptest::collection::vec(proptest::sample::select(&["a", "b", "c"][..]), 0..40)) {
            let words: Vec<String> = words.into_iter().map(str::to_owned).collect();
            let tokens: Vec<String> = tokens.into_iter().map(str::to_owned).collect();
            let t = term(&words.join(" "));
            prop_assert_eq!(count_occurrences(&t, &PageText::new("", tokens.clone())), oracle_count(&words, &tokens));
        }

        #[test]
        fn partitioned_equals_naive(set in arb_set(), tokens in arb_tokens()) {
            let p = PageText::new("", tokens);
            let partition = TermPartition::of(&set);
            prop_assert_eq!(score_partitioned(&p, &set, &partition), score_naive(&p, &set));
        }

        #[test]
        fn appending_a_term_never_decreases(set in arb_set(), tokens in arb_tokens(), pick in any::<proptest::sample::Index>()) {
            let before = score_naive(&PageText::new("", tokens.clone()), &set);
            let d = pick.index(set.len());
            let terms: Vec<&Term> = set.domain(d).weights().keys().collect();
            let t = terms[pick.index(terms.len())];
            let mut more = tokens;
            more.extend(t.words());
            let after = score_naive(&PageText::new("", more), &set);
            prop_assert!(after.get(d) >= before.get(d));
        }

        #[test]
        fn doubling_tokens_doubles_scores(set in arb_set(), tokens in arb_tokens()) {
            let once = Scorer::new(set.clone()).score(&PageText::new("", tokens.clone()));
            // A separator token keeps multiword matches from spanning the seam.
            let mut twice = tokens.clone();
            twice.push("|".into());
            twice.extend(tokens);
            let doubled = Scorer::new(set).score(&PageText::new("", twice));
            let expected: Vec<u64> = once.scores().iter().map(|s| s * 2).collect();
            prop_assert_eq!(doubled.scores(), expected.as_slice());
        }

        #[test]
        fn weight_scaling_is_linear(set in arb_set(), tokens in arb_tokens(), pick in any::<proptest::sample::Index>(), k in 1u64..=4) {
            let d = pick.index(set.len());
            let mut domains = set.domains().to_vec();
            let original = &domains[d];
            let capped: Option<WeightTable> = original.weights().iter()
                .map(|(t, w)| Weight::from_milli(w.milli() * k).map(|w| (t.clone(), w)))
                .collect();
            prop_assume!(capped.is_some());
            domains[d] = DomainOntology::new(original.id().clone(), capped.unwrap(), original.synonyms().clone()).unwrap();
            let scaled_set = OntologySet::new(domains).unwrap();
            let p = PageText::new("", tokens);
            let base = score_naive(&p, &set);
            let scaled = Scorer::new(scaled_set).score(&p);
            for i in 0..set.len() {
                let expected = if i == d { base.get(i) * k } else { base.get(i) };
                prop_assert_eq!(scaled.get(i), expected);
            }
        }

        #[test]
        fn classification_is_monotone(scores in proptest::collection::vec(0u64..5000, 1..6), bumps in proptest::collection::vec(0u64..3000, 6), limit in 1u64..4000) {
            let n = scores.len();
            let limits = RelevanceLimits::uniform(n, limit).unwrap();
            let low = RelevanceVector::from_milli(scores.clone());
            let high = RelevanceVector::from_milli(scores.iter().zip(&bumps).map(|(s, b)| s + b).collect());
            let a = classify_domains(&low, &limits).unwrap();
            let b = classify_domains(&high, &limits).unwrap();
            prop_assert!(a.is_subset_of(b));
        }
    }
}
