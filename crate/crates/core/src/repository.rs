//! The page repository: relevant pages as JSON lines, raw HTML cached by
//! content digest, and a log of URLs dropped past the tolerance limit.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ontology::DomainSet;
use crate::relevance::RelevanceVector;

#[derive(Debug, Error)]
pub enum RepositoryError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RepositoryError + '_ {
    move |source| RepositoryError::Io {
        path: path.to_owned(),
        source,
    }
}

/// One harvested page. `scores` are milli-units; `domains` are the indices
/// the page was classified into at crawl time.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageRecord {
    pub url: String,
    pub digest: String,
    pub scores: RelevanceVector,
    pub domains: Vec<usize>,
    pub fetched_at: String,
}

impl PageRecord {
    pub fn domain_set(&self) -> DomainSet {
        self.domains.iter().copied().collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscardEntry {
    pub url: String,
    pub level: u32,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Where a crawl's artifacts live inside an output directory.
#[derive(Clone, Debug)]
pub struct Layout {
    root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Layout { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn pages(&self) -> PathBuf {
        self.root.join("pages.jsonl")
    }

    pub fn discards(&self) -> PathBuf {
        self.root.join("discards.jsonl")
    }

    pub fn html_dir(&self) -> PathBuf {
        self.root.join("html")
    }

    pub fn html_path(&self, digest: &str) -> PathBuf {
        self.html_dir().join(format!("{digest}.html"))
    }

    pub fn report(&self) -> PathBuf {
        self.root.join("report.json")
    }

    pub fn graph(&self) -> PathBuf {
        self.root.join("graph.json")
    }
}

/// Receives the crawler's output.
pub trait PageSink {
    fn store(&mut self, record: &PageRecord, html: &[u8]) -> Result<(), RepositoryError>;
    fn discard(&mut self, entry: &DiscardEntry) -> Result<(), RepositoryError>;
    fn finish(&mut self) -> Result<(), RepositoryError> {
        Ok(())
    }
}

/// Keeps everything in memory; used for comparison runs and tests.
#[derive(Debug, Default)]
pub struct MemorySink {
    pub records: Vec<PageRecord>,
    pub discards: Vec<DiscardEntry>,
}

impl PageSink for MemorySink {
    fn store(&mut self, record: &PageRecord, _html: &[u8]) -> Result<(), RepositoryError> {
        self.records.push(record.clone());
        Ok(())
    }

    fn discard(&mut self, entry: &DiscardEntry) -> Result<(), RepositoryError> {
        self.discards.push(entry.clone());
        Ok(())
    }
}

/// Writes `pages.jsonl`, `discards.jsonl` and the HTML cache. Opening a
/// repository starts a fresh run: previous page and discard logs are
/// truncated, cached HTML is kept.
pub struct JsonlRepository {
    layout: Layout,
    pages: BufWriter<File>,
    discards: BufWriter<File>,
}

impl JsonlRepository {
    pub fn create(layout: Layout) -> Result<Self, RepositoryError> {
        fs::create_dir_all(layout.html_dir()).map_err(io_err(&layout.html_dir()))?;
        let pages_path = layout.pages();
        let pages = File::create(&pages_path).map_err(io_err(&pages_path))?;
        let discards_path = layout.discards();
        let discards = File::create(&discards_path).map_err(io_err(&discards_path))?;
        Ok(JsonlRepository {
            layout,
            pages: BufWriter::new(pages),
            discards: BufWriter::new(discards),
        })
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }
}

fn append_json<T: Serialize>(out: &mut BufWriter<File>, value: &T, path: &Path) -> Result<(), RepositoryError> {
    let line = serde_json::to_string(value).expect("record serializes");
    writeln!(out, "{line}").map_err(io_err(path))
}

impl PageSink for JsonlRepository {
    fn store(&mut self, record: &PageRecord, html: &[u8]) -> Result<(), RepositoryError> {
        let cached = self.layout.html_path(&record.digest);
        if !cached.exists() {
            let tmp = cached.with_extension("tmp");
            fs::write(&tmp, html).map_err(io_err(&tmp))?;
            fs::rename(&tmp, &cached).map_err(io_err(&cached))?;
        }
        append_json(&mut self.pages, record, &self.layout.pages())
    }

    fn discard(&mut self, entry: &DiscardEntry) -> Result<(), RepositoryError> {
        append_json(&mut self.discards, entry, &self.layout.discards())
    }

    fn finish(&mut self) -> Result<(), RepositoryError> {
        self.pages.flush().map_err(io_err(&self.layout.pages()))?;
        self.discards.flush().map_err(io_err(&self.layout.discards()))
    }
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, RepositoryError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(|e| RepositoryError::Corrupt {
            path: path.to_owned(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        out.push(value);
    }
    Ok(out)
}

pub fn read_records(path: &Path) -> Result<Vec<PageRecord>, RepositoryError> {
    read_jsonl(path)
}

pub fn read_discards(path: &Path) -> Result<Vec<DiscardEntry>, RepositoryError> {
    read_jsonl(path)
}

pub fn read_cached_html(layout: &Layout, digest: &str) -> Result<Vec<u8>, RepositoryError> {
    let path = layout.html_path(digest);
    fs::read(&path).map_err(io_err(&path))
}
