//! Stage files: their names, record shapes and atomic writes.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use weaksum::corpus::{Document, EntitySpan, ReferenceSummary, TopicInstance};
use weaksum::scorer::BudgetMode;
use weaksum::signals::SignalName;

use crate::CliError;

pub const DOCUMENTS: &str = "documents.jsonl";
pub const SIGNALS: &str = "signals.jsonl";
pub const RESOLVED_CONFIG: &str = "config.resolved.json";
pub const ORACLE: &str = "ORACLE";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub topic: TopicInstance,
    pub reference: Option<ReferenceSummary>,
}

/// One line of the document store.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocRecord {
    pub document: Document,
    pub entities: Vec<EntitySpan>,
    pub instances: Vec<Instance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub id: String,
    pub topic: String,
    pub summary: String,
    pub mode: BudgetMode,
}

/// A fusion variant. `all` uses every configured weight; the others zero the
/// weights outside (or inside) a signal set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum System {
    All,
    Drop(BTreeSet<SignalName>),
    Only(BTreeSet<SignalName>),
    Oracle,
}

fn names(set: &BTreeSet<SignalName>, sep: &str) -> String {
    set.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(sep)
}

impl System {
    pub fn display_name(&self) -> String {
        match self {
            System::All => "all".into(),
            System::Drop(set) => format!("all−{{{}}}", names(set, ",")),
            System::Only(set) if set.len() == 1 => format!("{}-only", names(set, "")),
            System::Only(set) => format!("{{{}}}-only", names(set, ",")),
            System::Oracle => ORACLE.into(),
        }
    }

    /// File-name form of the system name.
    pub fn slug(&self) -> String {
        match self {
            System::All => "all".into(),
            System::Drop(set) => format!("all-minus-{}", names(set, "-")),
            System::Only(set) => format!("only-{}", names(set, "-")),
            System::Oracle => "oracle".into(),
        }
    }

    pub fn from_slug(slug: &str) -> Option<Self> {
        let parse = |rest: &str| -> Option<BTreeSet<SignalName>> {
            let set: Option<BTreeSet<_>> = rest.split('-').map(|s| s.parse::<SignalName>().ok()).collect();
            set.filter(|s| !s.is_empty())
        };
        match slug {
            "all" => Some(System::All),
            "oracle" => Some(System::Oracle),
            _ => {
                if let Some(rest) = slug.strip_prefix("all-minus-") {
                    parse(rest).map(System::Drop)
                } else {
                    slug.strip_prefix("only-").and_then(parse).map(System::Only)
                }
            }
        }
    }

    pub fn labels_file(&self) -> String {
        format!("labels.{}.jsonl", self.slug())
    }

    pub fn model_file(&self) -> String {
        format!("model.{}.json", self.slug())
    }

    pub fn summaries_file(&self, mode: BudgetMode) -> String {
        format!("summaries.{}.{}.jsonl", self.slug(), mode.as_str())
    }
}

/// Splits `summaries.<slug>.<mode>.jsonl` into its system and mode.
pub fn parse_summaries_name(path: &Path) -> Option<(System, BudgetMode)> {
    let name = path.file_name()?.to_str()?;
    let inner = name.strip_prefix("summaries.")?.strip_suffix(".jsonl")?;
    let (slug, mode) = inner.rsplit_once('.')?;
    Some((System::from_slug(slug)?, mode.parse().ok()?))
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<(), CliError> {
    let mut out = String::new();
    for record in records {
        out.push_str(&serde_json::to_string(record).map_err(weaksum::Error::from)?);
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|e| {
                CliError::Data(weaksum::Error::Parse {
                    path: PathBuf::from(path),
                    line: i + 1,
                    message: e.to_string(),
                })
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(list: &str) -> BTreeSet<SignalName> {
        SignalName::parse_list(list).unwrap()
    }

    #[test]
    fn system_names() {
        let dropped = System::Drop(set("qa,ext"));
        assert_eq!(dropped.display_name(), "all−{ext,qa}");
        assert_eq!(dropped.slug(), "all-minus-ext-qa");
        assert_eq!(System::Only(set("ext")).display_name(), "ext-only");
        assert_eq!(System::Only(set("ext")).slug(), "only-ext");
        for system in [
            System::All,
            System::Oracle,
            dropped,
            System::Only(set("word_sim,topic_sent")),
        ] {
            assert_eq!(System::from_slug(&system.slug()), Some(system));
        }
        assert_eq!(System::from_slug("only-"), None);
        assert_eq!(System::from_slug("nope"), None);
    }

    #[test]
    fn summaries_names() {
        let path = Path::new("/x/summaries.all-minus-ext-qa.twenty_words.jsonl");
        assert_eq!(
            parse_summaries_name(path),
            Some((System::Drop(set("ext,qa")), BudgetMode::TwentyWords))
        );
        assert_eq!(parse_summaries_name(Path::new("labels.all.jsonl")), None);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/f.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }
}
