use crate::corpus::{tokenize, Document, EntitySpan, TopicInstance};
use crate::embeddings::{cosine, EmbeddingTable};
use crate::{Error, Result};

/// Dropped from topic text when a topic carries no entities.
pub const STOPWORDS: &[&str] = &[
    "a", "an", "and", "are", "as", "at", "be", "by", "for", "from", "has", "he", "in", "is", "it", "its", "of", "on",
    "or", "that", "the", "to", "was", "were", "will", "with",
];

/// Keyword token sequences of a topic: its entities, or else each
/// non-stopword topic token.
pub fn keywords(topic: &TopicInstance) -> Vec<Vec<String>> {
    let from_entities: Vec<Vec<String>> = topic
        .topic_entities
        .iter()
        .map(|e| tokenize(e))
        .filter(|t| !t.is_empty())
        .collect();
    if !from_entities.is_empty() {
        return from_entities;
    }
    topic
        .tokens()
        .into_iter()
        .filter(|t| !STOPWORDS.contains(&t.as_str()))
        .map(|t| vec![t])
        .collect()
}

fn contains_run(haystack: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

/// 1 where some topic keyword occurs as a contiguous token run.
pub fn rule_signal(doc: &Document, topic: &TopicInstance) -> Result<Vec<f64>> {
    let keywords = keywords(topic);
    if keywords.is_empty() {
        return Err(Error::NoKeywords(topic.topic_text.clone()));
    }
    Ok(doc
        .sentences
        .iter()
        .map(|s| {
            let hit = keywords.iter().any(|k| contains_run(&s.tokens, k));
            if hit {
                1.0
            } else {
                0.0
            }
        })
        .collect())
}

/// Per sentence, the best clamped cosine between any of its entities and any
/// topic entity. Multi-token entities are embedded as the mean of their token
/// vectors.
pub fn word_sim_signal(
    doc: &Document,
    doc_entities: &[EntitySpan],
    topic_entities: &[String],
    table: &EmbeddingTable,
) -> Vec<f64> {
    let topic_vectors: Vec<Vec<f64>> = topic_entities
        .iter()
        .map(|e| table.mean_vector(&tokenize(e)).vector)
        .collect();
    let mut out = vec![0.0; doc.len()];
    for span in doc_entities {
        let Some(slot) = out.get_mut(span.sentence_index) else {
            continue;
        };
        let vector = table.mean_vector(span.tokens(doc)).vector;
        for topic_vector in &topic_vectors {
            // Both vectors come from the same table, so lengths agree.
            let sim = cosine(&vector, topic_vector).unwrap_or(0.0).max(0.0);
            *slot = f64::max(*slot, sim);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{EntityExtractor, HeuristicExtractor, TopicOrigin};
    use proptest::prelude::*;
    use std::path::Path;

    fn sentences(texts: &[&str]) -> Document {
        Document::from_sentences("d", texts).unwrap()
    }

    #[test]
    fn rule_matches_coach_sentence() {
        let doc = sentences(&["(cnn) – the United States have named former Germany captain Jurgen Klinsmann as their new national coach, just a day after sacking Bob Bradley."]);
        let topic = TopicInstance::provided("d", "United States").unwrap();
        assert_eq!(rule_signal(&doc, &topic).unwrap(), [1.0]);
    }

    #[test]
    fn rule_no_occurrence() {
        let doc = sentences(&["the cat sat"]);
        assert_eq!(
            rule_signal(&doc, &TopicInstance::provided("d", "City").unwrap()).unwrap(),
            [0.0]
        );
    }

    #[test]
    fn rule_requires_contiguity() {
        let doc = sentences(&["york is new", "a trip to new york today"]);
        let topic = TopicInstance::provided("d", "New York").unwrap();
        assert_eq!(rule_signal(&doc, &topic).unwrap(), [0.0, 1.0]);
    }

    #[test]
    fn rule_falls_back_to_topic_tokens() {
        let topic = TopicInstance {
            doc_id: "d".into(),
            topic_text: "the Transfer of players".into(),
            topic_entities: vec![],
            origin: TopicOrigin::Provided,
        };
        assert_eq!(
            keywords(&topic),
            [vec!["transfer".to_string()], vec!["players".to_string()]]
        );
        let doc = sentences(&["players rest", "the of the"]);
        assert_eq!(rule_signal(&doc, &topic).unwrap(), [1.0, 0.0]);

        let empty = TopicInstance {
            topic_text: "of the".into(),
            ..topic
        };
        assert!(matches!(rule_signal(&doc, &empty), Err(Error::NoKeywords(_))));
    }

    fn table() -> EmbeddingTable {
        EmbeddingTable::parse(
            "city 1 0\nmanchester 1 1\nvieira 0 1\nunited 0.6 0.8\nstates 0.8 0.6\ninter -1 0",
            Path::new("t"),
        )
        .unwrap()
    }

    fn word_sim(texts: &[&str], topic: &[&str]) -> Vec<f64> {
        let doc = sentences(texts);
        let spans = HeuristicExtractor.extract(&doc).unwrap();
        let topic: Vec<String> = topic.iter().map(|s| s.to_string()).collect();
        word_sim_signal(&doc, &spans, &topic, &table())
    }

    #[test]
    fn word_sim_identical_entity() {
        assert_eq!(word_sim(&["they beat City today"], &["city"]), [1.0]);
    }

    #[test]
    fn word_sim_without_entities() {
        assert_eq!(word_sim(&["no capitals here"], &["city"]), [0.0]);
    }

    #[test]
    fn word_sim_clamps_negative_and_orthogonal() {
        assert_eq!(word_sim(&["fans of Vieira"], &["city"]), [0.0]);
        assert_eq!(word_sim(&["fans of Inter"], &["city"]), [0.0]);
        assert_eq!(word_sim(&["fans of Zed"], &["city"]), [0.0]);
    }

    #[test]
    fn word_sim_multi_token_mean() {
        // mean(united, states) = (0.7, 0.7); cos with city (1, 0) = 1/√2
        let got = word_sim(&["then United States and Vieira"], &["city"]);
        assert!((got[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn rule_subsumes_verbatim_topic(
            words in prop::collection::vec("[a-e]{1,2}", 1..10),
            start in 0usize..10,
            len in 1usize..3,
        ) {
            let start = start % words.len();
            let end = (start + len).min(words.len());
            let topic = TopicInstance::provided("d", words[start..end].join(" ")).unwrap();
            let doc = sentences(&[&words.join(" ")]);
            prop_assert_eq!(rule_signal(&doc, &topic).unwrap(), vec![1.0]);
        }

        #[test]
        fn word_sim_ignores_duplicate_entities(dup in 0usize..3) {
            let doc = sentences(&["then Vieira met United States", "and City won"]);
            let mut spans = HeuristicExtractor.extract(&doc).unwrap();
            let base = word_sim_signal(&doc, &spans, &["city".into(), "vieira".into()], &table());
            let copy = spans[dup % spans.len()].clone();
            spans.push(copy);
            let again = word_sim_signal(&doc, &spans, &["city".into(), "vieira".into()], &table());
            prop_assert_eq!(base, again);
        }
    }
}
