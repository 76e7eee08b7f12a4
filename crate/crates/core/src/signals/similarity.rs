use crate::corpus::{Document, ReferenceSummary, TopicInstance};
use crate::embeddings::{cosine, SentenceEncoder, SentenceVector};
use crate::Result;

fn sentence_vectors(doc: &Document, encoder: &dyn SentenceEncoder) -> Result<Vec<SentenceVector>> {
    (0..doc.len()).map(|i| encoder.sentence(doc, i)).collect()
}

fn clamped_against(anchor: &SentenceVector, doc: &Document, encoder: &dyn SentenceEncoder) -> Result<Vec<f64>> {
    sentence_vectors(doc, encoder)?
        .iter()
        .map(|b| Ok(cosine(&anchor.vector, &b.vector)?.max(0.0)))
        .collect()
}

/// `max(0, cos(topic, sentence))` per sentence.
pub fn topic_sent_signal(doc: &Document, topic: &TopicInstance, encoder: &dyn SentenceEncoder) -> Result<Vec<f64>> {
    clamped_against(&encoder.topic(topic)?, doc, encoder)
}

/// `max(0, cos(reference, sentence))` per sentence.
pub fn ref_sent_signal(
    doc: &Document,
    reference: &ReferenceSummary,
    encoder: &dyn SentenceEncoder,
) -> Result<Vec<f64>> {
    clamped_against(&encoder.reference(reference)?, doc, encoder)
}

/// Mean clamped cosine of each sentence to every other sentence. A
/// one-sentence document gets `[0]`.
pub fn sent_sent_signal(doc: &Document, encoder: &dyn SentenceEncoder) -> Result<Vec<f64>> {
    let n = doc.len();
    if n < 2 {
        return Ok(vec![0.0; n]);
    }
    let vectors = sentence_vectors(doc, encoder)?;
    let mut sums = vec![0.0; n];
    for i in 0..n {
        for j in i + 1..n {
            let t = cosine(&vectors[i].vector, &vectors[j].vector)?.max(0.0);
            sums[i] += t;
            sums[j] += t;
        }
    }
    let denom = (n - 1) as f64;
    Ok(sums.into_iter().map(|s| (s / denom).min(1.0)).collect())
}
