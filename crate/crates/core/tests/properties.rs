mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use ontocrawl::fetch::FetchMode;
use ontocrawl::graph::rebuild_from_records;
use ontocrawl::relevance::{classify_domains, PageText, RelevanceVector};
use ontocrawl::repository::MemorySink;
use ontocrawl::search::{parse_query, rank_results};
use ontocrawl::text::tokenize;
use ontocrawl::{crawl, CrawlConfig, DomainGraph, DomainSet, OntologySet, PageRecord, RelevanceLimits, Semantics};
use proptest::prelude::*;
use url::Url;

fn records_strategy() -> impl Strategy<Value = Vec<PageRecord>> {
    prop::collection::vec(prop::array::uniform3(0u64..5000), 0..80).prop_map(|rows| {
        rows.into_iter()
            .enumerate()
            .map(|(i, s)| PageRecord {
                url: format!("http://p.test/{i}"),
                digest: String::new(),
                scores: RelevanceVector::from_milli(s.to_vec()),
                domains: Vec::new(),
                fetched_at: String::new(),
            })
            .collect()
    })
}

fn limits(l: [u64; 3]) -> RelevanceLimits {
    RelevanceLimits::new(l.to_vec()).unwrap()
}

fn bucket_sizes(g: &DomainGraph) -> BTreeMap<DomainSet, usize> {
    g.buckets().map(|(s, ids)| (s, ids.len())).collect()
}

proptest! {
    #[test]
    fn rebuild_is_pure_and_matches_crawl_time_build(records in records_strategy(), l in prop::array::uniform3(1u64..5000)) {
        let lim = limits(l);
        let a = rebuild_from_records(&records, &lim).unwrap();
        let b = rebuild_from_records(&records, &lim).unwrap();
        prop_assert_eq!(&a, &b);

        // Records classified at crawl time under the same limits.
        let kept: Vec<(usize, PageRecord)> = records
            .iter()
            .enumerate()
            .filter_map(|(id, r)| {
                let set = classify_domains(&r.scores, &lim).unwrap();
                (!set.is_empty()).then(|| (id, PageRecord { domains: set.iter().collect(), ..r.clone() }))
            })
            .collect();
        let direct = DomainGraph::from_memberships(kept.iter().map(|(id, r)| (*id, r.domain_set())), 3).unwrap();
        prop_assert_eq!(&a, &direct);

        let s = a.stats();
        prop_assert!(s.m <= s.per_domain.iter().sum());
        prop_assert_eq!(a.space_edge_weight(), a.space().len() as u64);
    }

    #[test]
    fn lowering_limits_never_shrinks_a_domain(records in records_strategy(), hi in prop::array::uniform3(1u64..5000), cut in prop::array::uniform3(0u64..5000)) {
        let lo: [u64; 3] = std::array::from_fn(|i| hi[i].saturating_sub(cut[i]).max(1));
        let strict = rebuild_from_records(&records, &limits(hi)).unwrap().stats();
        let loose = rebuild_from_records(&records, &limits(lo)).unwrap().stats();
        for d in 0..3 {
            prop_assert!(loose.per_domain[d] >= strict.per_domain[d]);
        }
        prop_assert!(loose.m >= strict.m);
    }

    #[test]
    fn limits_above_every_score_give_an_empty_graph(records in records_strategy()) {
        let g = rebuild_from_records(&records, &limits([5000, 5000, 5000])).unwrap();
        prop_assert_eq!(bucket_sizes(&g).len(), 0);
    }

    #[test]
    fn widening_selection_never_shrinks_candidates(sets in prop::collection::vec(1u64..8, 0..60), a in 1u64..8, extra in 0u64..8) {
        let g = DomainGraph::from_memberships(sets.iter().enumerate().map(|(i, &b)| (i, DomainSet::from_bits(b))), 3).unwrap();
        let narrow = DomainSet::from_bits(a);
        let wide = DomainSet::from_bits(a | extra);
        for sem in [Semantics::Intersect, Semantics::Contain] {
            let n: BTreeSet<usize> = g.candidates(narrow, sem).into_iter().collect();
            let w: BTreeSet<usize> = g.candidates(wide, sem).into_iter().collect();
            prop_assert!(n.is_subset(&w));
        }
        let all: BTreeSet<usize> = g.candidates(DomainSet::full(3), Semantics::Intersect).into_iter().collect();
        prop_assert_eq!(all.len(), sets.len());
    }

    #[test]
    fn match_score_has_an_independent_evaluation(
        pages in prop::collection::vec((prop::collection::vec(0usize..6, 0..40), prop::array::uniform3(0u64..4000)), 1..20),
        query in prop::collection::vec(0usize..6, 1..4),
        sel in 1u64..8,
    ) {
        const VOCAB: [&str; 6] = ["ball", "goal", "wicket", "puck", "net", "run"];
        let records: Vec<PageRecord> = pages.iter().enumerate().map(|(i, (_, s))| PageRecord {
            url: format!("http://p.test/{i:02}"),
            digest: String::new(),
            scores: RelevanceVector::from_milli(s.to_vec()),
            domains: vec![0],
            fetched_at: String::new(),
        }).collect();
        let texts: Vec<PageText> = pages.iter().map(|(toks, _)| {
            PageText::new("", toks.iter().map(|&t| VOCAB[t].to_owned()).collect())
        }).collect();
        let raw: Vec<&str> = query.iter().map(|&q| VOCAB[q]).collect();
        let selected = DomainSet::from_bits(sel);
        let q = parse_query(&raw.join(" "), selected).unwrap();
        let ranked = rank_results(&q, records.iter().zip(&texts));

        let mut expected: Vec<(u64, String)> = Vec::new();
        for ((toks, scores), rec) in pages.iter().zip(&records) {
            let hits = raw.iter().map(|w| toks.iter().filter(|&&t| VOCAB[t] == *w).count() as u64).sum::<u64>();
            if hits > 0 {
                let rel: u64 = (0..3).filter(|&d| sel & (1 << d) != 0).map(|d| scores[d]).sum();
                expected.push((hits * 1000 + rel, rec.url.clone()));
            }
        }
        expected.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        let got: Vec<(u64, String)> = ranked.into_iter().map(|r| (r.match_score, r.url)).collect();
        prop_assert_eq!(got, expected);
    }
}

/// A random site: page i is relevant or not and links to some pages, a few
/// of which do not exist.
#[derive(Clone, Debug)]
struct Site {
    relevant: Vec<bool>,
    links: Vec<Vec<usize>>,
}

const MISSING: usize = 1000;

fn site_strategy() -> impl Strategy<Value = Site> {
    (2usize..25).prop_flat_map(|n| {
        let target = prop_oneof![9 => 0..n, 1 => Just(MISSING)];
        (
            prop::collection::vec(prop::bool::weighted(0.35), n),
            prop::collection::vec(prop::collection::vec(target, 0..4), n),
        )
            .prop_map(|(relevant, links)| Site { relevant, links })
    })
}

/// Fixpoint of best irrelevance levels, propagating only from pages that
/// are fetchable (level within tolerance).
fn oracle_stored(site: &Site, tolerance: u32) -> BTreeSet<usize> {
    let mut best: BTreeMap<usize, u32> = BTreeMap::from([(0, 0)]);
    loop {
        let mut changed = false;
        for (&page, &level) in best.clone().iter() {
            if level > tolerance || page == MISSING {
                continue;
            }
            let child = if site.relevant[page] { 0 } else { level + 1 };
            for &l in &site.links[page] {
                if best.get(&l).is_none_or(|&b| child < b) {
                    best.insert(l, child);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    best.into_iter()
        .filter(|&(p, l)| p != MISSING && l <= tolerance && site.relevant[p])
        .map(|(p, _)| p)
        .collect()
}

fn write_site(site: &Site) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let host = dir.path().join("rand.test");
    std::fs::create_dir_all(&host).unwrap();
    for (i, links) in site.links.iter().enumerate() {
        let body = if site.relevant[i] { "wicket wicket wicket" } else { "nothing" };
        let anchors: String = links.iter().map(|l| format!("<a href=\"/p{l}.html\">x</a>")).collect();
        std::fs::write(host.join(format!("p{i}.html")), format!("<p>{body}</p>{anchors}")).unwrap();
    }
    dir
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn crawl_reaches_exactly_the_tolerated_relevant_pages(site in site_strategy(), tolerance in 0u32..4, concurrency in 1usize..4) {
        let dir = write_site(&site);
        let set = OntologySet::load_manifest(&fixtures().join("ontology/manifest.json")).unwrap();
        let cfg = CrawlConfig {
            seeds: vec![Url::parse("http://rand.test/p0.html").unwrap()],
            max_pages: 10_000,
            tolerance_limit: tolerance,
            limits: RelevanceLimits::uniform(3, 2000).unwrap(),
            fetch: FetchMode::Corpus { root: dir.path().to_owned() },
            max_concurrent_fetches: concurrency,
        };
        let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap();
        let mut sink = MemorySink::default();
        let outcome = rt.block_on(crawl(&cfg, &set, &mut sink)).unwrap();

        let stored: Vec<usize> = sink.records.iter()
            .map(|r| r.url.trim_start_matches("http://rand.test/p").trim_end_matches(".html").parse().unwrap())
            .collect();
        let unique: BTreeSet<usize> = stored.iter().copied().collect();
        prop_assert_eq!(unique.len(), stored.len(), "a page was stored twice");
        prop_assert_eq!(unique, oracle_stored(&site, tolerance));
        for r in &sink.records {
            let set = classify_domains(&r.scores, &cfg.limits).unwrap();
            prop_assert!(!set.is_empty());
            prop_assert_eq!(&r.domains, &set.iter().collect::<Vec<_>>());
        }
        prop_assert!(outcome.report.pages_fetched + outcome.report.fetch_errors <= site.relevant.len() as u64 + 1);
    }
}

#[test]
fn tokenizer_output_is_normalized_words() {
    for tok in tokenize("Ball, &amp; Wicket-keeper  ÉTÉ 4x4") {
        assert_eq!(ontocrawl::normalize_term(&tok).unwrap().as_str(), tok);
        assert!(!tok.contains(' '));
    }
}
