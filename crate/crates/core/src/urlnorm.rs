use thiserror::Error;
use url::Url;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum UrlError {
    #[error("invalid url {0:?}")]
    InvalidUrl(String),
}

/// Resolves `raw` against `base` and canonicalizes it: scheme and host
/// lowercased, default port dropped, fragment removed. Only http and https
/// are accepted.
pub fn normalize_url(raw: &str, base: &Url) -> Result<Url, UrlError> {
    let invalid = || UrlError::InvalidUrl(raw.to_owned());
    let mut url = base.join(raw.trim()).map_err(|_| invalid())?;
    canonicalize(&mut url).ok_or_else(invalid)?;
    Ok(url)
}

/// Parses an absolute URL (a seed) with the same canonicalization.
pub fn parse_absolute(raw: &str) -> Result<Url, UrlError> {
    let invalid = || UrlError::InvalidUrl(raw.to_owned());
    let mut url = Url::parse(raw.trim()).map_err(|_| invalid())?;
    canonicalize(&mut url).ok_or_else(invalid)?;
    Ok(url)
}

fn canonicalize(url: &mut Url) -> Option<()> {
    if !matches!(url.scheme(), "http" | "https") {
        return None;
    }
    if url.host_str().is_none_or(str::is_empty) {
        return None;
    }
    // The url crate already lowercases scheme and host and drops default ports.
    url.set_fragment(None);
    Some(())
}
