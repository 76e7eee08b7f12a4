//! ROUGE-1/2/L and corpus-level report rows.
//!
//! Scores use this crate's tokenizer with no stemming and no stopword
//! removal, so absolute numbers are only comparable within this crate.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::corpus::{normalize_entity, tokenize};
use crate::scorer::BudgetMode;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RougeScore {
    pub const ZERO: RougeScore = RougeScore {
        precision: 0.0,
        recall: 0.0,
        f1: 0.0,
    };

    /// Precision and recall from a match count; a zero total zeroes that side.
    pub fn from_counts(matched: usize, candidate_total: usize, reference_total: usize) -> Self {
        let ratio = |total: usize| if total == 0 { 0.0 } else { matched as f64 / total as f64 };
        Self::from_pr(ratio(candidate_total), ratio(reference_total))
    }

    pub fn from_pr(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self { precision, recall, f1 }
    }
}

fn ngram_counts<T: Eq + Hash>(tokens: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut counts = HashMap::new();
    if n > 0 && tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Number of n-grams of `candidate` matched in `reference`, each reference
/// occurrence usable once.
pub fn clipped_overlap<T: Eq + Hash>(candidate: &[T], reference: &[T], n: usize) -> usize {
    let reference_counts = ngram_counts(reference, n);
    ngram_counts(candidate, n)
        .into_iter()
        .map(|(gram, count)| count.min(reference_counts.get(gram).copied().unwrap_or(0)))
        .sum()
}

fn ngram_total(len: usize, n: usize) -> usize {
    (len + 1).saturating_sub(n)
}

pub fn rouge_n<T: Eq + Hash>(candidate: &[T], reference: &[T], n: usize) -> RougeScore {
    assert!(n >= 1, "ROUGE-N needs n ≥ 1");
    let matched = clipped_overlap(candidate, reference, n);
    RougeScore::from_counts(
        matched,
        ngram_total(candidate.len(), n),
        ngram_total(reference.len(), n),
    )
}

/// Longest common subsequence length, bit-parallel over `a`.
pub fn lcs_len<T: Eq + Hash>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let blocks = a.len().div_ceil(64);
    let mut masks: HashMap<&T, Vec<u64>> = HashMap::new();
    for (i, token) in a.iter().enumerate() {
        masks.entry(token).or_insert_with(|| vec![0; blocks])[i / 64] |= 1 << (i % 64);
    }
    // V has a 0 bit for every row where the LCS length steps up.
    let mut v = vec![u64::MAX; blocks];
    for token in b {
        let Some(mask) = masks.get(token) else {
            continue;
        };
        let mut carry = 0u64;
        for (word, &m) in v.iter_mut().zip(mask) {
            let u = *word & m;
            let (sum, c1) = word.overflowing_add(u);
            let (sum, c2) = sum.overflowing_add(carry);
            carry = u64::from(c1 || c2);
            *word = sum | (*word & !m);
        }
    }
    let mut zeros = 0;
    for (i, word) in v.iter().enumerate() {
        let bits = (a.len() - i * 64).min(64);
        let live = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
        zeros += (!word & live).count_ones() as usize;
    }
    zeros
}

/// Sentence-level ROUGE-L (β = 1).
pub fn rouge_l<T: Eq + Hash>(candidate: &[T], reference: &[T]) -> RougeScore {
    RougeScore::from_counts(lcs_len(candidate, reference), candidate.len(), reference.len())
}

/// A text keyed by document id and topic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyedText {
    pub id: String,
    pub topic: String,
    pub text: String,
}

impl KeyedText {
    pub fn new(id: impl Into<String>, topic: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            topic: topic.into(),
            text: text.into(),
        }
    }

    fn key(&self) -> (String, String) {
        (self.id.clone(), normalize_entity(&self.topic))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    #[serde(rename = "system")]
    pub system_name: String,
    pub mode: BudgetMode,
    #[serde(rename = "r1")]
    pub rouge1: f64,
    #[serde(rename = "r2")]
    pub rouge2: f64,
    #[serde(rename = "rl")]
    pub rouge_l: f64,
    #[serde(rename = "n")]
    pub instance_count: usize,
}

/// Per-pair F1 scores in summary order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairScores {
    pub rouge1: RougeScore,
    pub rouge2: RougeScore,
    pub rouge_l: RougeScore,
}

pub fn score_pair(candidate: &str, reference: &str) -> PairScores {
    let (c, r) = (tokenize(candidate), tokenize(reference));
    PairScores {
        rouge1: rouge_n(&c, &r, 1),
        rouge2: rouge_n(&c, &r, 2),
        rouge_l: rouge_l(&c, &r),
    }
}

/// Unweighted corpus means of ROUGE-1/2/L F1. Topics are matched
/// case-insensitively.
pub fn evaluate_corpus(
    system_name: &str,
    mode: BudgetMode,
    summaries: &[KeyedText],
    references: &[KeyedText],
) -> Result<ReportRow> {
    if summaries.is_empty() {
        return Err(Error::InvalidArgument(format!("system {system_name} has no summaries")));
    }
    let by_key: HashMap<(String, String), &KeyedText> = references.iter().map(|r| (r.key(), r)).collect();
    let missing: Vec<String> = summaries
        .iter()
        .filter(|s| !by_key.contains_key(&s.key()))
        .map(|s| format!("{}/{}", s.id, s.topic))
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingReference(missing));
    }
    let (mut r1, mut r2, mut rl) = (0.0, 0.0, 0.0);
    for summary in summaries {
        let scores = score_pair(&summary.text, &by_key[&summary.key()].text);
        r1 += scores.rouge1.f1;
        r2 += scores.rouge2.f1;
        rl += scores.rouge_l.f1;
    }
    let n = summaries.len() as f64;
    Ok(ReportRow {
        system_name: system_name.to_string(),
        mode,
        rouge1: r1 / n,
        rouge2: r2 / n,
        rouge_l: rl / n,
        instance_count: summaries.len(),
    })
}

/// Rows in caller order, renderable as a fixed-width table or JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub rows: Vec<ReportRow>,
}

pub fn ablation_report(rows: Vec<ReportRow>) -> Result<AblationReport> {
    if rows.is_empty() {
        return Err(Error::EmptyReport);
    }
    Ok(AblationReport { rows })
}

impl AblationReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Fixed-width table, scores in percent. The best score of each column
    /// within a budget mode is marked with `*`.
    pub fn to_text(&self) -> String {
        let mut best: BTreeMap<&str, [f64; 3]> = BTreeMap::new();
        for row in &self.rows {
            let entry = best.entry(row.mode.as_str()).or_insert([f64::NEG_INFINITY; 3]);
            for (slot, value) in entry.iter_mut().zip([row.rouge1, row.rouge2, row.rouge_l]) {
                *slot = slot.max(value);
            }
        }
        let width = self
            .rows
            .iter()
            .map(|r| r.system_name.chars().count())
            .max()
            .unwrap_or(0)
            .max("system".len());
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$}  {:<12}  {:>8}  {:>8}  {:>8}  {:>6}",
            "system", "mode", "ROUGE-1", "ROUGE-2", "ROUGE-L", "n"
        );
        for row in &self.rows {
            let maxima = best[row.mode.as_str()];
            let cell = |value: f64, max: f64| {
                let mark = if value == max { "*" } else { " " };
                format!("{:>7.2}{mark}", value * 100.0)
            };
            let pad = width - row.system_name.chars().count();
            let _ = writeln!(
                out,
                "{}{}  {:<12}  {}  {}  {}  {:>6}",
                row.system_name,
                " ".repeat(pad),
                row.mode.as_str(),
                cell(row.rouge1, maxima[0]),
                cell(row.rouge2, maxima[1]),
                cell(row.rouge_l, maxima[2]),
                row.instance_count
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<String> {
        tokenize(s)
    }

    fn dp_lcs(a: &[u8], b: &[u8]) -> usize {
        let mut table = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for i in 1..=a.len() {
            for j in 1..=b.len() {
                table[i][j] = if a[i - 1] == b[j - 1] {
                    table[i - 1][j - 1] + 1
                } else {
                    table[i - 1][j].max(table[i][j - 1])
                };
            }
        }
        table[a.len()][b.len()]
    }

    #[test]
    fn rouge_n_identical_and_disjoint() {
        let a = toks("the cat sat on the mat");
        assert_eq!(rouge_n(&a, &a, 1), RougeScore::from_pr(1.0, 1.0));
        assert_eq!(rouge_n(&a, &a, 2).f1, 1.0);
        assert_eq!(rouge_n(&a, &toks("dogs bark loudly"), 1), RougeScore::ZERO);
    }

    #[test]
    fn rouge_1_hand_count() {
        let s = rouge_n(&toks("the cat sat"), &toks("the cat"), 1);
        assert!((s.precision - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(s.recall, 1.0);
        assert!((s.f1 - 0.8).abs() < 1e-12);
    }

    #[test]
    fn rouge_n_clips_repeats() {
        let s = rouge_n(&toks("the the the"), &toks("the cat"), 1);
        assert!((s.precision - 1.0 / 3.0).abs() < 1e-12);
        assert!((s.recall - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rouge_l_examples() {
        let a = toks("a b c d e");
        assert_eq!(rouge_l(&a, &a), RougeScore::from_pr(1.0, 1.0));
        let s = rouge_l(&a, &toks("a c e"));
        assert_eq!(lcs_len(&a, &toks("a c e")), 3);
        assert!((s.precision - 0.6).abs() < 1e-12);
        assert_eq!(s.recall, 1.0);
        assert!((s.f1 - 0.75).abs() < 1e-12);
        assert_eq!(rouge_l(&Vec::<String>::new(), &a), RougeScore::ZERO);
    }

    #[test]
    fn lcs_crosses_word_boundaries() {
        let a: Vec<u8> = (0..150).map(|i| (i * 7 % 5) as u8).collect();
        let b: Vec<u8> = (0..130).map(|i| (i * 3 % 4) as u8).collect();
        assert_eq!(lcs_len(&a, &b), dp_lcs(&a, &b));
    }

    #[test]
    fn corpus_means() {
        let refs = vec![KeyedText::new("a", "T", "x y"), KeyedText::new("b", "t", "p q r s t")];
        let row = evaluate_corpus(
            "sys",
            BudgetMode::OneSentence,
            &[KeyedText::new("a", "t", "x y")],
            &refs,
        )
        .unwrap();
        assert_eq!(
            (row.rouge1, row.rouge2, row.rouge_l, row.instance_count),
            (1.0, 1.0, 1.0, 1)
        );

        // F1 0.8 (the cat sat vs the cat) and 0.4 (p vs p q r s) → 0.6
        let refs = vec![KeyedText::new("a", "t", "the cat"), KeyedText::new("b", "t", "p q r s")];
        let sums = vec![KeyedText::new("a", "t", "the cat sat"), KeyedText::new("b", "t", "p")];
        let row = evaluate_corpus("sys", BudgetMode::OneSentence, &sums, &refs).unwrap();
        assert!((row.rouge1 - 0.6).abs() < 1e-12);
    }

    #[test]
    fn corpus_missing_reference() {
        let err = evaluate_corpus(
            "sys",
            BudgetMode::OneSentence,
            &[KeyedText::new("a", "t", "x")],
            &[KeyedText::new("b", "t", "x")],
        )
        .unwrap_err();
        assert!(err.to_string().contains("a/t"));
    }

    fn row(name: &str, r1: f64) -> ReportRow {
        ReportRow {
            system_name: name.into(),
            mode: BudgetMode::OneSentence,
            rouge1: r1,
            rouge2: r1 / 2.0,
            rouge_l: 0.3,
            instance_count: 4,
        }
    }

    #[test]
    fn report_rendering() {
        let report = ablation_report(vec![row("all", 0.2773), row("ext-only", 0.1832), row("ORACLE", 0.3455)]).unwrap();
        let text = report.to_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[3].starts_with("ORACLE") && lines[3].contains("34.55*"));
        assert!(lines[1].contains("27.73 ") && !lines[1].contains("27.73*"));
        assert!(lines.iter().skip(1).all(|l| l.contains("30.00*")));
        assert!(matches!(ablation_report(vec![]), Err(Error::EmptyReport)));
    }

    #[test]
    fn report_json_round_trip() {
        let report = ablation_report(vec![row("all", 0.1 + 0.2), row("x", 1.0 / 3.0)]).unwrap();
        let json = report.to_json().unwrap();
        assert!(json.contains("\"r1\""));
        assert_eq!(AblationReport::from_json(&json).unwrap(), report);
    }

    fn token_lists() -> impl Strategy<Value = (Vec<u8>, Vec<u8>)> {
        (
            prop::collection::vec(0u8..6, 0..20),
            prop::collection::vec(0u8..6, 0..20),
        )
    }

    proptest! {
        #[test]
        fn rouge_n_f1_symmetric((a, b) in token_lists(), n in 1usize..4) {
            let (ab, ba) = (rouge_n(&a, &b, n), rouge_n(&b, &a, n));
            prop_assert_eq!(ab.precision, ba.recall);
            prop_assert!((ab.f1 - ba.f1).abs() < 1e-12);
        }

        #[test]
        fn rouge_n_too_long_is_zero((a, b) in token_lists()) {
            let n = a.len().min(b.len()) + 1;
            prop_assert_eq!(rouge_n(&a, &b, n), RougeScore::ZERO);
        }

        #[test]
        fn lcs_bounds_common_run((a, b) in token_lists()) {
            let mut longest = 0;
            for i in 0..a.len() {
                for j in 0..b.len() {
                    let mut k = 0;
                    while i + k < a.len() && j + k < b.len() && a[i + k] == b[j + k] {
                        k += 1;
                    }
                    longest = longest.max(k);
                }
            }
            prop_assert!(lcs_len(&a, &b) >= longest);
            prop_assert_eq!(lcs_len(&a, &b), dp_lcs(&a, &b));
        }

        #[test]
        fn appending_matching_reference_token_is_monotone((a, b) in token_lists(), pick in 0usize..20) {
            prop_assume!(!a.is_empty());
            let before = clipped_overlap(&a, &b, 1);
            let mut longer = b.clone();
            longer.push(a[pick % a.len()]);
            prop_assert!(clipped_overlap(&a, &longer, 1) >= before);
        }
    }
}
