//! Document stream ingestion.
//!
//! Two on-disk formats are supported, both UTF-8 and one record per line:
//!
//! * JSONL with keys `id`, `timestamp`, `text` and an optional `topic`,
//! * TSV with the four columns `id \t timestamp \t topic \t text`, where the
//!   topic column may be empty.
//!
//! Positions are assigned after ordering and are 1-based and consecutive.
//! Records whose text tokenizes to nothing are skipped and do not consume a
//! position.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    /// 1-based index in the stream.
    pub position: u64,
    /// Milliseconds since the epoch.
    pub timestamp: i64,
    pub tokens: Vec<String>,
    pub topic: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StreamFormat {
    Jsonl,
    Tsv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamOrdering {
    #[default]
    AsIs,
    /// Sort by `(timestamp, id)` ascending.
    ByTimestamp,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StreamSource {
    pub format: StreamFormat,
    pub path: PathBuf,
    pub ordering: StreamOrdering,
}

impl StreamSource {
    pub fn new(format: StreamFormat, path: impl Into<PathBuf>) -> Self {
        StreamSource {
            format,
            path: path.into(),
            ordering: StreamOrdering::AsIs,
        }
    }

    pub fn ordering(mut self, ordering: StreamOrdering) -> Self {
        self.ordering = ordering;
        self
    }
}

/// A small English stopword list. Only used when a [`Tokenizer`] is built
/// with [`Tokenizer::with_english_stopwords`].
const ENGLISH_STOPWORDS: &[&str] = &[
    "a", "an", "and", "are", "as", "at", "be", "by", "for", "from", "has", "he", "in", "is", "it",
    "its", "of", "on", "that", "the", "to", "was", "were", "will", "with",
];

/// Lowercasing tokenizer splitting on every non-alphanumeric character.
#[derive(Debug, Clone, Default)]
pub struct Tokenizer {
    stopwords: Option<HashSet<String>>,
}

impl Tokenizer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_english_stopwords() -> Self {
        Tokenizer {
            stopwords: Some(ENGLISH_STOPWORDS.iter().map(|s| s.to_string()).collect()),
        }
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        text.split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(str::to_lowercase)
            .filter(|t| match &self.stopwords {
                Some(stop) => !stop.contains(t),
                None => true,
            })
            .collect()
    }
}

/// Tokenize with the default (no stopwords) tokenizer. Duplicates are kept.
pub fn tokenize(text: &str) -> Vec<String> {
    Tokenizer::default().tokenize(text)
}

#[derive(Debug, Deserialize)]
struct JsonRecord {
    id: String,
    timestamp: i64,
    text: String,
    #[serde(default)]
    topic: Option<String>,
}

#[derive(Debug)]
struct RawRecord {
    line: usize,
    id: String,
    timestamp: i64,
    topic: Option<String>,
    text: String,
}

fn parse_jsonl_line(line_no: usize, line: &str) -> Result<RawRecord> {
    let rec: JsonRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
        line: line_no,
        message: e.to_string(),
    })?;
    Ok(RawRecord {
        line: line_no,
        id: rec.id,
        timestamp: rec.timestamp,
        topic: rec.topic.filter(|t| !t.is_empty()),
        text: rec.text,
    })
}

fn parse_tsv_line(line_no: usize, line: &str) -> Result<RawRecord> {
    let parse_err = |message: String| Error::Parse {
        line: line_no,
        message,
    };
    let mut cols = line.splitn(4, '\t');
    let id = cols.next().unwrap_or_default();
    let (Some(ts), Some(topic), Some(text)) = (cols.next(), cols.next(), cols.next()) else {
        return Err(parse_err(
            "expected 4 tab-separated columns: id, timestamp, topic, text".into(),
        ));
    };
    if id.is_empty() {
        return Err(parse_err("missing field `id`".into()));
    }
    let timestamp = ts
        .trim()
        .parse::<i64>()
        .map_err(|e| parse_err(format!("bad timestamp `{ts}`: {e}")))?;
    Ok(RawRecord {
        line: line_no,
        id: id.to_string(),
        timestamp,
        topic: (!topic.is_empty()).then(|| topic.to_string()),
        text: text.to_string(),
    })
}

/// Parse a stream from any reader. Blank lines are ignored.
pub fn parse_stream<R: Read>(
    reader: R,
    format: StreamFormat,
    ordering: StreamOrdering,
    tokenizer: &Tokenizer,
) -> Result<Vec<Document>> {
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let rec = match format {
            StreamFormat::Jsonl => parse_jsonl_line(line_no, line)?,
            StreamFormat::Tsv => parse_tsv_line(line_no, line)?,
        };
        if !seen.insert(rec.id.clone()) {
            return Err(Error::DuplicateId(rec.id));
        }
        records.push(rec);
    }

    if ordering == StreamOrdering::ByTimestamp {
        records.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.id.cmp(&b.id)));
    }

    let mut docs = Vec::with_capacity(records.len());
    for rec in records {
        let tokens = tokenizer.tokenize(&rec.text);
        if tokens.is_empty() {
            warn!(
                "skipping record `{}` (line {}): no tokens",
                rec.id, rec.line
            );
            continue;
        }
        docs.push(Document {
            id: rec.id,
            position: docs.len() as u64 + 1,
            timestamp: rec.timestamp,
            tokens,
            topic: rec.topic,
        });
    }
    Ok(docs)
}

pub fn read_stream(source: &StreamSource) -> Result<Vec<Document>> {
    read_stream_with(source, &Tokenizer::default())
}

pub fn read_stream_with(source: &StreamSource, tokenizer: &Tokenizer) -> Result<Vec<Document>> {
    let file = File::open(&source.path)?;
    parse_stream(file, source.format, source.ordering, tokenizer)
}

#[derive(Serialize)]
struct JsonOut<'a> {
    id: &'a str,
    timestamp: i64,
    text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    topic: Option<&'a str>,
}

/// Write documents as JSONL, joining tokens with single spaces.
pub fn write_jsonl<W: Write>(mut out: W, docs: &[Document]) -> Result<()> {
    for doc in docs {
        let rec = JsonOut {
            id: &doc.id,
            timestamp: doc.timestamp,
            text: doc.tokens.join(" "),
            topic: doc.topic.as_deref(),
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn format_for_path(path: &Path) -> Option<StreamFormat> {
    match path.extension()?.to_str()? {
        "jsonl" | "json" => Some(StreamFormat::Jsonl),
        "tsv" | "tab" => Some(StreamFormat::Tsv),
        _ => None,
    }
}
