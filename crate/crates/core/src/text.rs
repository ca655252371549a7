/// Splits text into lowercase word tokens. Any character that is not
/// alphanumeric separates tokens, so punctuation never ends up in a token.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}
