use std::collections::VecDeque;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::document::{Document, DocumentOptions, ReferenceSummary};
use super::topics::TopicInstance;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusFormat {
    /// One article per file; body first, then `@highlight` blocks.
    Stories,
    /// `{"id", "document", "reference"?, "topic"?}` per line.
    Jsonl,
}

impl std::str::FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stories" => Ok(Self::Stories),
            "jsonl" => Ok(Self::Jsonl),
            other => Err(Error::InvalidArgument(format!("unknown corpus format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub format: CorpusFormat,
    pub document: DocumentOptions,
}

impl IngestOptions {
    pub fn new(format: CorpusFormat) -> Self {
        Self {
            format,
            document: DocumentOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub document: Document,
    pub reference: Option<ReferenceSummary>,
    pub topic: Option<TopicInstance>,
}

#[derive(Deserialize)]
struct JsonRecord {
    id: String,
    document: String,
    #[serde(default)]
    reference: Option<String>,
    #[serde(default)]
    topic: Option<String>,
}

/// Streaming reader over a corpus file or directory.
///
/// Files are visited in name order. Unreadable files end the stream with an
/// error; malformed records are logged, counted and skipped.
pub struct Ingest {
    options: IngestOptions,
    files: VecDeque<PathBuf>,
    pending: VecDeque<(usize, String)>,
    current: Option<PathBuf>,
    skipped: usize,
    failed: bool,
}

/// Opens `path` (a file or a directory of files) for ingestion.
pub fn ingest(path: impl AsRef<Path>, options: IngestOptions) -> Result<Ingest> {
    let path = path.as_ref();
    let metadata = std::fs::metadata(path).map_err(|e| Error::io(path, e))?;
    let files: Vec<PathBuf> = if metadata.is_dir() {
        let mut files = Vec::new();
        for entry in std::fs::read_dir(path).map_err(|e| Error::io(path, e))? {
            let entry = entry.map_err(|e| Error::io(path, e))?;
            let file = entry.path();
            let hidden = file
                .file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with('.'));
            let wanted = match options.format {
                CorpusFormat::Jsonl => file.extension().is_some_and(|e| e == "jsonl"),
                CorpusFormat::Stories => true,
            };
            if file.is_file() && !hidden && wanted {
                files.push(file);
            }
        }
        files.sort();
        files
    } else {
        vec![path.to_path_buf()]
    };
    Ok(Ingest {
        options,
        files: files.into(),
        pending: VecDeque::new(),
        current: None,
        skipped: 0,
        failed: false,
    })
}

impl Ingest {
    /// Records skipped so far.
    pub fn skipped(&self) -> usize {
        self.skipped
    }

    fn skip(&mut self, path: &Path, line: usize, why: impl std::fmt::Display) {
        log::warn!("{}:{line}: skipping record: {why}", path.display());
        self.skipped += 1;
    }

    fn story(&self, path: &Path, text: &str) -> Result<Record> {
        let id = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        let mut body = Vec::new();
        let mut highlights = Vec::new();
        let mut in_highlight = false;
        for line in text.lines() {
            let line = line.trim();
            if line.starts_with("@highlight") {
                in_highlight = true;
            } else if in_highlight {
                if !line.is_empty() {
                    highlights.push(line);
                    in_highlight = false;
                }
            } else {
                body.push(line);
            }
        }
        let document = Document::from_text(
            id.clone(),
            &body.join("\n"),
            path.display().to_string(),
            &self.options.document,
        )?;
        let reference = ReferenceSummary::new(id, highlights.join("\n"));
        Ok(Record {
            document,
            reference,
            topic: None,
        })
    }

    fn json_record(&self, path: &Path, line: &str) -> Result<Record> {
        let raw: JsonRecord = serde_json::from_str(line)?;
        if raw.id.trim().is_empty() {
            return Err(Error::InvalidArgument("empty id".into()));
        }
        let document = Document::from_text(
            raw.id.clone(),
            &raw.document,
            path.display().to_string(),
            &self.options.document,
        )?;
        let reference = raw.reference.and_then(|r| ReferenceSummary::new(raw.id.clone(), r));
        let topic = raw.topic.and_then(|t| TopicInstance::provided(raw.id, t));
        Ok(Record {
            document,
            reference,
            topic,
        })
    }

    fn advance_file(&mut self) -> Option<Result<Record>> {
        let path = self.files.pop_front()?;
        let text = match std::fs::read_to_string(&path) {
            Ok(text) => text,
            Err(e) => {
                self.failed = true;
                return Some(Err(Error::io(&path, e)));
            }
        };
        match self.options.format {
            CorpusFormat::Stories => match self.story(&path, &text) {
                Ok(record) => return Some(Ok(record)),
                Err(e) => self.skip(&path, 1, e),
            },
            CorpusFormat::Jsonl => {
                self.pending = text
                    .lines()
                    .enumerate()
                    .filter(|(_, l)| !l.trim().is_empty())
                    .map(|(i, l)| (i + 1, l.to_string()))
                    .collect();
                self.current = Some(path);
            }
        }
        None
    }
}

impl Iterator for Ingest {
    type Item = Result<Record>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if self.failed {
                return None;
            }
            if let Some((line_no, line)) = self.pending.pop_front() {
                let path = self.current.clone().unwrap_or_default();
                match self.json_record(&path, &line) {
                    Ok(record) => return Some(Ok(record)),
                    Err(e) => {
                        self.skip(&path, line_no, e);
                        continue;
                    }
                }
            }
            if self.files.is_empty() {
                return None;
            }
            if let Some(item) = self.advance_file() {
                return Some(item);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let path = dir.join(name);
        std::fs::write(&path, body).unwrap();
        path
    }

    #[test]
    fn two_jsonl_records() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(
            dir.path(),
            "c.jsonl",
            "{\"id\": \"a\", \"document\": \"The cat sat. It purred.\", \"reference\": \"A cat sat.\", \"topic\": \"cat\"}\n\n{\"id\": \"b\", \"document\": \"Dogs bark.\"}\n",
        );
        let mut stream = ingest(&path, IngestOptions::new(CorpusFormat::Jsonl)).unwrap();
        let records: Vec<Record> = stream.by_ref().collect::<Result<_>>().unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(stream.skipped(), 0);
        assert_eq!(records[0].document.len(), 2);
        assert_eq!(records[0].topic.as_ref().unwrap().topic_text, "cat");
        assert!(records[1].reference.is_none() && records[1].topic.is_none());
    }

    #[test]
    fn empty_body_is_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(
            dir.path(),
            "c.jsonl",
            "{\"id\": \"a\", \"document\": \"  \"}\n{\"id\": \"b\", \"document\": \"Fine.\"}\n",
        );
        let mut stream = ingest(&path, IngestOptions::new(CorpusFormat::Jsonl)).unwrap();
        let records: Vec<Record> = stream.by_ref().collect::<Result<_>>().unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(stream.skipped(), 1);
    }

    #[test]
    fn mixed_valid_and_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let mut lines = Vec::new();
        for i in 0..10 {
            lines.push(match i {
                2 => "{not json".to_string(),
                5 => format!("{{\"id\": \"d{i}\"}}"),
                8 => format!("{{\"id\": \"d{i}\", \"document\": \"...\"}}"),
                _ => format!("{{\"id\": \"d{i}\", \"document\": \"Sentence {i} here.\"}}"),
            });
        }
        let path = write(dir.path(), "c.jsonl", &lines.join("\n"));
        let mut stream = ingest(&path, IngestOptions::new(CorpusFormat::Jsonl)).unwrap();
        let records: Vec<Record> = stream.by_ref().collect::<Result<_>>().unwrap();
        assert_eq!(records.len(), 7);
        assert_eq!(stream.skipped(), 3);
    }

    #[test]
    fn stories_directory() {
        let dir = tempfile::tempdir().unwrap();
        write(
            dir.path(),
            "b.story",
            "Second story body. More text here.\n\n@highlight\n\nfirst highlight\n\n@highlight\n\nsecond highlight\n",
        );
        write(dir.path(), "a.story", "First story. Only body.\n");
        write(dir.path(), "c.story", "\n@highlight\n\nno body\n");
        write(dir.path(), ".hidden", "Ignored.");
        let mut stream = ingest(dir.path(), IngestOptions::new(CorpusFormat::Stories)).unwrap();
        let records: Vec<Record> = stream.by_ref().collect::<Result<_>>().unwrap();
        assert_eq!(stream.skipped(), 1);
        let ids: Vec<_> = records.iter().map(|r| r.document.id.as_str()).collect();
        assert_eq!(ids, ["a", "b"]);
        assert!(records[0].reference.is_none());
        let reference = records[1].reference.as_ref().unwrap();
        assert_eq!(reference.tokens, ["first", "highlight", "second", "highlight"]);
        assert_eq!(records[1].document.len(), 2);
    }

    #[test]
    fn missing_path_is_fatal() {
        assert!(ingest("/nonexistent/corpus", IngestOptions::new(CorpusFormat::Jsonl)).is_err());
    }
}
