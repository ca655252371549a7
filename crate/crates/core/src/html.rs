//! Text and link extraction from fetched HTML.

use scraper::{Html, Node, Selector};
use url::Url;

use crate::relevance::PageText;
use crate::text::tokenize;
use crate::urlnorm::normalize_url;

const HIDDEN_ELEMENTS: &[&str] = &["script", "style", "noscript", "template"];

fn parse(html: &[u8]) -> Html {
    Html::parse_document(&String::from_utf8_lossy(html))
}

/// Tokens from the title and visible text of a page, in document order.
/// Script and style bodies and comments are skipped; entities are decoded by
/// the parser. Invalid markup is tolerated.
pub fn extract_text(html: &[u8], source_url: &str) -> PageText {
    let doc = parse(html);
    let mut tokens = Vec::new();
    for node in doc.tree.root().descendants() {
        let Node::Text(text) = node.value() else { continue };
        let hidden = node.ancestors().any(|a| match a.value() {
            Node::Element(e) => HIDDEN_ELEMENTS.contains(&e.name()),
            _ => false,
        });
        if !hidden {
            tokens.extend(tokenize(text));
        }
    }
    PageText {
        source_url: source_url.to_owned(),
        tokens,
    }
}

/// De-duplicated http(s) anchor targets in document order, normalized
/// against `base`. Anchors that do not resolve are skipped.
pub fn extract_links(html: &[u8], base: &Url) -> Vec<Url> {
    let doc = parse(html);
    let anchors = Selector::parse("a[href]").expect("static selector");
    let mut seen = std::collections::HashSet::new();
    doc.select(&anchors)
        .filter_map(|a| a.value().attr("href"))
        .filter_map(|href| normalize_url(href, base).ok())
        .filter(|u| seen.insert(u.as_str().to_owned()))
        .collect()
}
