use std::collections::BTreeSet;

/// Abbreviations that never end a sentence, compared lowercased and without
/// their final period.
pub const DEFAULT_ABBREVIATIONS: &[&str] = &["mr", "mrs", "dr", "st", "u.s"];

/// A whitespace-delimited piece of text that yields exactly one token.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawToken<'a> {
    /// The piece as it appears in the text, punctuation included.
    pub raw: &'a str,
    /// The piece with leading and trailing punctuation removed, original case.
    pub core: &'a str,
    /// Byte offset of `raw` in the source text.
    pub start: usize,
}

impl RawToken<'_> {
    pub fn end(&self) -> usize {
        self.start + self.raw.len()
    }

    /// Characters stripped before the core.
    pub fn leading(&self) -> &str {
        let offset = self.core.as_ptr() as usize - self.raw.as_ptr() as usize;
        &self.raw[..offset]
    }

    /// Characters stripped after the core.
    pub fn trailing(&self) -> &str {
        let offset = self.core.as_ptr() as usize - self.raw.as_ptr() as usize;
        &self.raw[offset + self.core.len()..]
    }

    pub fn normalized(&self) -> String {
        normalize(self.core)
    }
}

fn strip_punctuation(piece: &str) -> &str {
    piece.trim_matches(|c: char| !c.is_alphanumeric())
}

fn normalize(core: &str) -> String {
    let lower = core.to_lowercase();
    strip_punctuation(&lower).to_string()
}

/// Splits `text` into the pieces that produce tokens, keeping byte offsets.
pub fn raw_tokens(text: &str) -> Vec<RawToken<'_>> {
    fn push<'a>(text: &'a str, start: usize, end: usize, out: &mut Vec<RawToken<'a>>) {
        let raw = &text[start..end];
        let core = strip_punctuation(raw);
        if !core.is_empty() && !normalize(core).is_empty() {
            out.push(RawToken { raw, core, start });
        }
    }
    let mut out = Vec::new();
    let mut piece_start: Option<usize> = None;
    for (i, c) in text.char_indices() {
        match (c.is_whitespace(), piece_start) {
            (true, Some(start)) => {
                push(text, start, i, &mut out);
                piece_start = None;
            }
            (false, None) => piece_start = Some(i),
            _ => {}
        }
    }
    if let Some(start) = piece_start {
        push(text, start, text.len(), &mut out);
    }
    out
}

/// Lowercases, splits on whitespace and strips leading/trailing punctuation
/// from each piece. Internal punctuation (`u.s`, `33-year-old`, `soccer's`)
/// survives and empty pieces are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    raw_tokens(text).iter().map(RawToken::normalized).collect()
}

/// Longest prefix of `text` whose tokenization is the first `max_tokens`
/// tokens of `text`. Returns the whole (trimmed) text when it is shorter.
pub fn truncate_to_tokens(text: &str, max_tokens: usize) -> &str {
    let tokens = raw_tokens(text);
    if tokens.len() <= max_tokens {
        return text.trim();
    }
    if max_tokens == 0 {
        return "";
    }
    text[..tokens[max_tokens - 1].end()].trim()
}

/// Rule-based sentence splitter.
///
/// A sentence ends at a run of `.`, `!` or `?` that is followed by whitespace
/// and then an uppercase letter, or by the end of the text. A single period
/// closing a known abbreviation never ends a sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceSplitter {
    abbreviations: BTreeSet<String>,
}

impl Default for SentenceSplitter {
    fn default() -> Self {
        Self::with_abbreviations(DEFAULT_ABBREVIATIONS.iter().copied())
    }
}

impl SentenceSplitter {
    pub fn with_abbreviations<I, S>(abbreviations: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            abbreviations: abbreviations
                .into_iter()
                .map(|a| a.as_ref().trim_end_matches('.').to_lowercase())
                .collect(),
        }
    }

    pub fn abbreviations(&self) -> impl Iterator<Item = &str> {
        self.abbreviations.iter().map(String::as_str)
    }

    fn ends_with_abbreviation(&self, chunk: &str) -> bool {
        let Some(word) = chunk.split_whitespace().last() else {
            return false;
        };
        let Some(word) = word.strip_suffix('.') else {
            return false;
        };
        let word = word.trim_start_matches(|c: char| !c.is_alphanumeric());
        self.abbreviations.contains(&word.to_lowercase())
    }

    /// Splits `text`, returning trimmed slices of the original.
    pub fn split<'a>(&self, text: &'a str) -> Vec<&'a str> {
        let chars: Vec<(usize, char)> = text.char_indices().collect();
        let is_terminator = |c: char| matches!(c, '.' | '!' | '?');
        let mut out = Vec::new();
        let mut start = 0;
        let mut i = 0;
        while i < chars.len() {
            if !is_terminator(chars[i].1) {
                i += 1;
                continue;
            }
            let mut j = i;
            while j + 1 < chars.len() && is_terminator(chars[j + 1].1) {
                j += 1;
            }
            let end = chars[j].0 + chars[j].1.len_utf8();
            let boundary = match chars.get(j + 1) {
                None => true,
                Some(&(_, c)) if c.is_whitespace() => {
                    let next = chars[j + 1..].iter().find(|(_, c)| !c.is_whitespace());
                    next.is_none_or(|&(_, c)| c.is_uppercase())
                }
                Some(_) => false,
            };
            let single_period = i == j && chars[i].1 == '.';
            if boundary && !(single_period && self.ends_with_abbreviation(&text[start..end])) {
                let sentence = text[start..end].trim();
                if !sentence.is_empty() {
                    out.push(sentence);
                }
                start = end;
            }
            i = j + 1;
        }
        let rest = text[start..].trim();
        if !rest.is_empty() {
            out.push(rest);
        }
        out
    }
}

/// Splits with the default abbreviation list.
pub fn split_sentences(text: &str) -> Vec<&str> {
    SentenceSplitter::default().split(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Character-at-a-time restatement of the tokenizer rule.
    fn reference_tokenize(text: &str) -> Vec<String> {
        let mut tokens = Vec::new();
        let mut current = String::new();
        for c in text.chars().chain(std::iter::once(' ')) {
            if c.is_whitespace() {
                let lower: Vec<char> = current.to_lowercase().chars().collect();
                let first = lower.iter().position(|c| c.is_alphanumeric());
                let last = lower.iter().rposition(|c| c.is_alphanumeric());
                if let (Some(a), Some(b)) = (first, last) {
                    tokens.push(lower[a..=b].iter().collect());
                }
                current.clear();
            } else {
                current.push(c);
            }
        }
        tokens
    }

    #[test]
    fn tokenize_strips_sentence_punctuation() {
        assert_eq!(tokenize("The cat sat."), ["the", "cat", "sat"]);
    }

    #[test]
    fn tokenize_empty() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("  -- ... ").is_empty());
    }

    #[test]
    fn tokenize_keeps_internal_punctuation() {
        let text = "U.S. soccer's 33-year-old";
        assert_eq!(tokenize(text), ["u.s", "soccer's", "33-year-old"]);
        assert_eq!(tokenize(text), reference_tokenize(text));
    }

    #[test]
    fn tokenize_numbers_as_is() {
        assert_eq!(
            tokenize("won 1-0, scored 3.5 ($20)"),
            ["won", "1-0", "scored", "3.5", "20"]
        );
    }

    #[test]
    fn raw_tokens_report_stripped_parts() {
        let toks = raw_tokens("(CNN) -- Klinsmann, coach.");
        let cores: Vec<_> = toks.iter().map(|t| t.core).collect();
        assert_eq!(cores, ["CNN", "Klinsmann", "coach"]);
        assert_eq!(toks[0].leading(), "(");
        assert_eq!(toks[0].trailing(), ")");
        assert_eq!(toks[1].trailing(), ",");
        assert_eq!(toks[2].end(), "(CNN) -- Klinsmann, coach.".len());
    }

    #[test]
    fn truncate_lands_on_token_boundary() {
        let text = "one two, three four. five";
        assert_eq!(truncate_to_tokens(text, 2), "one two,");
        assert_eq!(tokenize(truncate_to_tokens(text, 3)), ["one", "two", "three"]);
        assert_eq!(truncate_to_tokens(text, 10), text);
        assert_eq!(truncate_to_tokens(text, 0), "");
    }

    #[test]
    fn split_plain_sentences() {
        assert_eq!(split_sentences("A b. C d."), ["A b.", "C d."]);
    }

    #[test]
    fn split_respects_abbreviations() {
        assert_eq!(
            split_sentences("Dr. Smith left. He ran."),
            ["Dr. Smith left.", "He ran."]
        );
        assert_eq!(
            split_sentences("The U.S. Soccer Federation met. It agreed."),
            ["The U.S. Soccer Federation met.", "It agreed."]
        );
    }

    #[test]
    fn split_without_terminator() {
        assert_eq!(split_sentences("one sentence only"), ["one sentence only"]);
        assert!(split_sentences("   ").is_empty());
    }

    #[test]
    fn split_needs_uppercase_continuation() {
        assert_eq!(split_sentences("it was 3. then more"), ["it was 3. then more"]);
        assert_eq!(split_sentences("Really?! Yes."), ["Really?!", "Yes."]);
        assert_eq!(split_sentences("Version 2.0 Out. Now"), ["Version 2.0 Out.", "Now"]);
    }

    #[test]
    fn custom_abbreviations() {
        let splitter = SentenceSplitter::with_abbreviations(["Gen."]);
        assert_eq!(
            splitter.split("Gen. Lee rode. Dr. No."),
            ["Gen. Lee rode.", "Dr.", "No."]
        );
    }

    fn normalize_ws(s: &str) -> String {
        s.split_whitespace().collect::<Vec<_>>().join(" ")
    }

    proptest! {
        #[test]
        fn tokenize_matches_reference(text in "\\PC{0,60}") {
            prop_assert_eq!(tokenize(&text), reference_tokenize(&text));
        }

        #[test]
        fn tokenize_is_idempotent(text in "[a-zA-Z0-9.,'!?()\\- \u{e9}\u{df}]{0,60}") {
            let tokens = tokenize(&text);
            prop_assert_eq!(tokenize(&tokens.join(" ")), tokens);
        }

        #[test]
        fn split_preserves_text(text in "[a-zA-Z.!? \n]{0,80}") {
            let joined = split_sentences(&text).join(" ");
            prop_assert_eq!(normalize_ws(&joined), normalize_ws(&text));
        }
    }
}
