use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::document::Document;
use super::entities::EntitySpan;
use super::text::tokenize;

pub const DEFAULT_MAX_TOPICS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopicOrigin {
    Provided,
    Generated,
}

/// One (document, topic) example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicInstance {
    pub doc_id: String,
    pub topic_text: String,
    /// Normalized entity strings; tokens joined by single spaces.
    pub topic_entities: Vec<String>,
    pub origin: TopicOrigin,
}

/// Lowercased tokens joined by single spaces.
pub fn normalize_entity(surface: &str) -> String {
    tokenize(surface).join(" ")
}

impl TopicInstance {
    /// A topic supplied with the data. The whole topic text is treated as one
    /// entity; `None` when it has no tokens.
    pub fn provided(doc_id: impl Into<String>, topic_text: impl Into<String>) -> Option<Self> {
        let topic_text = topic_text.into();
        let entity = normalize_entity(&topic_text);
        (!entity.is_empty()).then(|| Self {
            doc_id: doc_id.into(),
            topic_text,
            topic_entities: vec![entity],
            origin: TopicOrigin::Provided,
        })
    }

    pub fn tokens(&self) -> Vec<String> {
        tokenize(&self.topic_text)
    }

    /// Case-insensitive key used to match topics across files.
    pub fn key(&self) -> String {
        normalize_entity(&self.topic_text)
    }
}

/// One topic per distinct normalized entity, ordered by frequency (desc) and
/// then first occurrence, truncated to `max_topics`.
pub fn generate_topics(doc: &Document, spans: &[EntitySpan], max_topics: usize) -> Vec<TopicInstance> {
    struct Tally<'a> {
        count: usize,
        first: usize,
        surface: &'a str,
    }
    let mut tallies: HashMap<String, Tally<'_>> = HashMap::new();
    for (order, span) in spans.iter().enumerate() {
        let key = span.normalized(doc);
        if key.is_empty() {
            continue;
        }
        tallies.entry(key).and_modify(|t| t.count += 1).or_insert(Tally {
            count: 1,
            first: order,
            surface: &span.surface,
        });
    }
    let mut ranked: Vec<(String, Tally<'_>)> = tallies.into_iter().collect();
    ranked.sort_by(|(_, a), (_, b)| b.count.cmp(&a.count).then(a.first.cmp(&b.first)));
    ranked
        .into_iter()
        .take(max_topics)
        .map(|(key, tally)| TopicInstance {
            doc_id: doc.id.clone(),
            topic_text: tally.surface.to_string(),
            topic_entities: vec![key],
            origin: TopicOrigin::Generated,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{EntityExtractor, HeuristicExtractor};

    fn topics_of(sentences: &[&str], max_topics: usize) -> Vec<String> {
        let doc = Document::from_sentences("d", sentences).unwrap();
        let spans = HeuristicExtractor.extract(&doc).unwrap();
        generate_topics(&doc, &spans, max_topics)
            .into_iter()
            .map(|t| t.topic_text)
            .collect()
    }

    #[test]
    fn frequency_then_first_occurrence() {
        let got = topics_of(
            &[
                "he saw Vieira",
                "the club City won",
                "then City lost",
                "and Arsenal drew",
            ],
            2,
        );
        assert_eq!(got, ["City", "Vieira"]);
    }

    #[test]
    fn no_entities_no_topics() {
        assert!(topics_of(&["the cat sat"], 5).is_empty());
    }

    #[test]
    fn case_insensitive_merge() {
        let got = topics_of(&["we met Bob Smith", "and BOB SMITH again", "with Ann"], 5);
        assert_eq!(got, ["Bob Smith", "Ann"]);
    }

    #[test]
    fn klinsmann_story_yields_united_states() {
        let doc = Document::from_text(
            "cnn",
            "(cnn) – the United States have named former Germany captain Jurgen Klinsmann as their new national coach, just a day after sacking Bob Bradley. Bradley, who took over as coach in January 2007, was relieved of his duties on Thursday, and U.S. soccer federation president Sunil Gulati confirmed in a statement on Friday that his replacement had already been appointed.",
            "",
            &Default::default(),
        )
        .unwrap();
        let spans = HeuristicExtractor.extract(&doc).unwrap();
        let topics = generate_topics(&doc, &spans, DEFAULT_MAX_TOPICS);
        assert!(topics.len() <= DEFAULT_MAX_TOPICS);
        assert!(topics.iter().any(|t| t.topic_text == "United States"));
        assert!(topics
            .iter()
            .all(|t| t.origin == TopicOrigin::Generated && !t.topic_entities.is_empty()));
    }

    #[test]
    fn provided_topic_is_single_entity() {
        let topic = TopicInstance::provided("d", "New York").unwrap();
        assert_eq!(topic.topic_entities, ["new york"]);
        assert!(TopicInstance::provided("d", "  ").is_none());
    }
}
