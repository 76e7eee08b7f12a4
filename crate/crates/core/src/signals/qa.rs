use std::collections::HashMap;
use std::path::Path;

use serde::Deserialize;

use crate::corpus::normalize_entity;
use crate::{Error, Result};

#[derive(Deserialize)]
struct AnswerRecord {
    id: String,
    topic: String,
    answer: String,
}

/// Answers produced offline by an external QA model, read from JSON lines
/// `{"id", "topic", "answer"}`. Topics match case-insensitively; the first
/// answer for a key wins.
#[derive(Debug, Clone, Default)]
pub struct QaAnswers {
    answers: HashMap<(String, String), String>,
}

impl QaAnswers {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut answers = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: AnswerRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })?;
            answers
                .entry((record.id, normalize_entity(&record.topic)))
                .or_insert(record.answer);
        }
        Ok(Self { answers })
    }

    pub fn insert(&mut self, id: impl Into<String>, topic: &str, answer: impl Into<String>) {
        self.answers
            .entry((id.into(), normalize_entity(topic)))
            .or_insert_with(|| answer.into());
    }

    pub fn get(&self, id: &str, topic: &str) -> Option<&str> {
        self.answers
            .get(&(id.to_string(), normalize_entity(topic)))
            .map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.answers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.answers.is_empty()
    }
}
