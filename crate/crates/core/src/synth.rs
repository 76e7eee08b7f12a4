//! Seeded generator for a small synthetic topic corpus.
//!
//! Each document is a handful of templated filler sentences plus one planted
//! sentence about the topic entity. The reference is a synonym paraphrase of
//! the planted sentence and the QA answer is a span of it. Some documents also
//! mention the topic entity in an unrelated sentence, so keyword matching by
//! itself cannot find the planted sentence every time.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::corpus::tokenize;

const PLACES: &[&str] = &[
    "Aldermoor",
    "Brenford",
    "Castellan",
    "Dunmore",
    "Elstow",
    "Farrowby",
    "Galen",
    "Harwick",
    "Ivel",
    "Jessop",
    "Kelmscott",
    "Lorne",
];
const KINDS: &[&str] = &["United", "Rovers", "Council", "Athletic", "Group", "Trust"];

const VERBS: &[(&str, &str)] = &[
    ("announced", "declared"),
    ("confirmed", "verified"),
    ("unveiled", "revealed"),
    ("secured", "obtained"),
    ("approved", "endorsed"),
];

/// Object phrases paired with their paraphrases.
const OBJECTS: &[(&str, &str)] = &[
    ("a new stadium deal", "a fresh arena agreement"),
    ("the regional transport plan", "the district transit scheme"),
    ("a record transfer fee", "an unprecedented signing payment"),
    ("the harbour renewal project", "the port restoration programme"),
    ("a youth coaching budget", "a junior training allowance"),
    ("the winter pitch repairs", "the seasonal turf fixes"),
];

const TIMES: &[&str] = &[
    "after a long meeting",
    "before the weekend",
    "following the vote",
    "despite early doubts",
];

const FILLERS: &[&str] = &[
    "Local traders said business remained quiet near the market.",
    "The weather stayed mild across the valley for most of the day.",
    "Officials from {other} met residents to discuss parking.",
    "Several roads were closed while crews painted new lines.",
    "A small crowd watched the evening concert by the river.",
    "Ticket prices for the museum rose slightly this month.",
    "Volunteers from {other} cleaned the paths around the lake.",
    "Commuters reported delays on the northern rail line.",
    "The library extended its opening hours during the holidays.",
    "Farmers expect a modest harvest after the dry spring.",
    "Reporters waited outside while {other} held a private briefing.",
    "Schools in the area will reopen on schedule next week.",
];

const HARD_NEGATIVES: &[&str] = &[
    "Fans of {topic} gathered quietly outside the gates.",
    "A mural of {topic} was painted near the bus station.",
    "Supporters wearing {topic} scarves queued for coffee.",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    pub documents: usize,
    pub seed: u64,
    pub dim: usize,
    pub min_sentences: usize,
    pub max_sentences: usize,
    pub hard_negative_rate: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            documents: 200,
            seed: 13,
            dim: 24,
            min_sentences: 6,
            max_sentences: 10,
            hard_negative_rate: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthDocument {
    pub id: String,
    pub topic: String,
    pub sentences: Vec<String>,
    pub planted: usize,
    pub reference: String,
    pub answer: String,
}

impl SynthDocument {
    pub fn text(&self) -> String {
        self.sentences.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub documents: Vec<SynthDocument>,
    /// Word vectors keyed by token, sorted for stable output.
    pub vectors: BTreeMap<String, Vec<f64>>,
}

fn entity(rng: &mut ChaCha8Rng) -> String {
    format!("{} {}", PLACES.choose(rng).unwrap(), KINDS.choose(rng).unwrap())
}

fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

impl SynthCorpus {
    pub fn generate(options: &SynthOptions) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
        let mut documents = Vec::with_capacity(options.documents);
        for d in 0..options.documents {
            let topic = entity(&mut rng);
            let mut other = entity(&mut rng);
            while other == topic {
                other = entity(&mut rng);
            }
            let (verb, verb_syn) = *VERBS.choose(&mut rng).unwrap();
            let (object, object_syn) = *OBJECTS.choose(&mut rng).unwrap();
            let time = *TIMES.choose(&mut rng).unwrap();
            let planted_text = format!("{topic} {verb} {object} {time}.");
            let reference = format!("{topic} {verb_syn} {object_syn} {time}.");
            let answer = format!("{verb} {object}");

            let n = rng.gen_range(options.min_sentences..=options.max_sentences);
            let fillers: Vec<&str> = FILLERS.choose_multiple(&mut rng, n - 1).copied().collect();
            let mut sentences: Vec<String> = fillers.iter().map(|f| f.replace("{other}", &other)).collect();
            if rng.gen_bool(options.hard_negative_rate) {
                let slot = rng.gen_range(0..sentences.len());
                sentences[slot] = HARD_NEGATIVES.choose(&mut rng).unwrap().replace("{topic}", &topic);
            }
            let planted = rng.gen_range(0..n);
            sentences.insert(planted, planted_text);
            documents.push(SynthDocument {
                id: format!("synth-{d:04}"),
                topic,
                sentences,
                planted,
                reference,
                answer,
            });
        }

        let mut vocabulary = BTreeSet::new();
        for doc in &documents {
            vocabulary.extend(tokenize(&doc.text()));
            vocabulary.extend(tokenize(&doc.reference));
        }
        let mut synonyms: BTreeMap<String, String> = BTreeMap::new();
        for (base, syn) in VERBS.iter().chain(OBJECTS) {
            for (b, s) in tokenize(base).into_iter().zip(tokenize(syn)) {
                if b != s {
                    synonyms.insert(s, b);
                }
            }
        }
        let mut vectors = BTreeMap::new();
        for word in vocabulary.iter().filter(|w| !synonyms.contains_key(*w)) {
            vectors.insert(word.clone(), random_vector(&mut rng, options.dim));
        }
        for (syn, base) in &synonyms {
            let noise = random_vector(&mut rng, options.dim);
            let v = match vectors.get(base) {
                Some(b) => b.iter().zip(&noise).map(|(x, e)| x + 0.2 * e).collect(),
                None => noise,
            };
            vectors.insert(syn.clone(), v);
        }
        Self { documents, vectors }
    }

    /// Corpus as JSON lines `{"id", "document", "reference", "topic"}`.
    pub fn corpus_jsonl(&self) -> String {
        let mut out = String::new();
        for doc in &self.documents {
            let line = json!({
                "id": doc.id,
                "document": doc.text(),
                "reference": doc.reference,
                "topic": doc.topic,
            });
            writeln!(out, "{line}").unwrap();
        }
        out
    }

    /// Word vectors in the `COUNT DIM` header text format.
    pub fn embeddings_text(&self) -> String {
        let dim = self.vectors.values().next().map_or(0, Vec::len);
        let mut out = format!("{} {dim}\n", self.vectors.len());
        for (word, vector) in &self.vectors {
            out.push_str(word);
            for x in vector {
                write!(out, " {x}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// QA answers as JSON lines `{"id", "topic", "answer"}`.
    pub fn qa_jsonl(&self) -> String {
        let mut out = String::new();
        for doc in &self.documents {
            let line = json!({"id": doc.id, "topic": doc.topic, "answer": doc.answer});
            writeln!(out, "{line}").unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{split_sentences, tokenize};
    use crate::embeddings::{cosine, EmbeddingTable};
    use std::path::Path;

    fn small() -> SynthCorpus {
        SynthCorpus::generate(&SynthOptions {
            documents: 30,
            ..Default::default()
        })
    }

    #[test]
    fn seeded_output_is_stable() {
        assert_eq!(small(), small());
        let other = SynthCorpus::generate(&SynthOptions {
            documents: 30,
            seed: 99,
            ..Default::default()
        });
        assert_ne!(small().documents, other.documents);
    }

    #[test]
    fn documents_split_back_into_their_sentences() {
        for doc in small().documents {
            assert_eq!(split_sentences(&doc.text()), doc.sentences);
            assert!(doc.sentences[doc.planted].contains(&doc.answer));
            assert!(doc.sentences[doc.planted].starts_with(&doc.topic));
        }
    }

    #[test]
    fn reference_shares_words_with_planted_sentence() {
        for doc in small().documents {
            let planted: BTreeSet<String> = tokenize(&doc.sentences[doc.planted]).into_iter().collect();
            let reference = tokenize(&doc.reference);
            let shared = reference.iter().filter(|t| planted.contains(*t)).count();
            assert!(shared >= 3 && shared < reference.len(), "{doc:?}");
        }
    }

    #[test]
    fn embeddings_cover_vocabulary_and_synonyms_stay_close() {
        let corpus = small();
        let table = EmbeddingTable::parse(&corpus.embeddings_text(), Path::new("synth")).unwrap();
        assert_eq!(table.dim(), 24);
        for doc in &corpus.documents {
            for t in tokenize(&doc.text()).iter().chain(&tokenize(&doc.reference)) {
                assert!(table.get(t).is_some(), "{t}");
            }
        }
        let sim = cosine(table.get("stadium").unwrap(), table.get("arena").unwrap()).unwrap();
        assert!(sim > 0.8, "{sim}");
    }
}
