//! Cleaning and tokenization of chapter text.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::Chapter;
use crate::label::BookLabel;

const ENGLISH_STOPWORDS: &str = include_str!("../stopwords/english.txt");
const ARCHAIC_STOPWORDS: &str = include_str!("../stopwords/archaic.txt");

#[derive(Debug, thiserror::Error)]
pub enum TextError {
    #[error("reading stopword file {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid stopword `{0}`: entries must be lowercase without whitespace")]
    InvalidStopword(String),
    #[error("vocabulary is empty")]
    EmptyVocabulary,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopwordSet {
    base: BTreeSet<String>,
    extra: BTreeSet<String>,
}

/// Parses a stopword list: one token per line, `#` starts a comment.
pub fn parse_stopword_list(text: &str) -> Result<BTreeSet<String>, TextError> {
    let mut out = BTreeSet::new();
    for line in text.lines() {
        let entry = line.split('#').next().unwrap_or("").trim();
        if entry.is_empty() {
            continue;
        }
        if entry.chars().any(|c| c.is_whitespace() || c.is_uppercase()) {
            return Err(TextError::InvalidStopword(entry.to_string()));
        }
        out.insert(entry.to_string());
    }
    Ok(out)
}

impl StopwordSet {
    pub fn empty() -> Self {
        StopwordSet::default()
    }

    /// The bundled English list with no extras.
    pub fn english() -> Self {
        StopwordSet {
            base: parse_stopword_list(ENGLISH_STOPWORDS).expect("bundled list is valid"),
            extra: BTreeSet::new(),
        }
    }

    /// English plus the bundled archaic forms (`thou`, `hath`, ...).
    pub fn english_with_archaic() -> Self {
        let mut set = StopwordSet::english();
        set.extra = parse_stopword_list(ARCHAIC_STOPWORDS).expect("bundled list is valid");
        set
    }

    pub fn from_words<I, S>(words: I) -> Result<Self, TextError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let joined: Vec<String> = words.into_iter().map(|w| w.as_ref().to_string()).collect();
        Ok(StopwordSet {
            base: parse_stopword_list(&joined.join("\n"))?,
            extra: BTreeSet::new(),
        })
    }

    pub fn add_extra_file(&mut self, path: &Path) -> Result<(), TextError> {
        let text = fs::read_to_string(path).map_err(|source| TextError::Io {
            path: path.into(),
            source,
        })?;
        self.extra.extend(parse_stopword_list(&text)?);
        Ok(())
    }

    pub fn add_extra<S: Into<String>>(&mut self, word: S) -> Result<(), TextError> {
        let word = word.into();
        if word.is_empty() || word.chars().any(|c| c.is_whitespace() || c.is_uppercase()) {
            return Err(TextError::InvalidStopword(word));
        }
        self.extra.insert(word);
        Ok(())
    }

    pub fn contains(&self, token: &str) -> bool {
        self.base.contains(token) || self.extra.contains(token)
    }

    pub fn len(&self) -> usize {
        self.base.union(&self.extra).count()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty() && self.extra.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedChapter {
    pub book: BookLabel,
    pub index: usize,
    pub tokens: Vec<String>,
}

/// Lowercases and splits on anything that is not an ASCII letter. Digits,
/// verse markers, punctuation, hyphens and apostrophes all act as separators.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_ascii_lowercase())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

pub fn clean_and_tokenize(chapter: &Chapter, stops: &StopwordSet) -> TokenizedChapter {
    TokenizedChapter {
        book: chapter.book,
        index: chapter.index,
        tokens: tokenize(&chapter.raw_text)
            .into_iter()
            .filter(|t| !stops.contains(t))
            .collect(),
    }
}

/// Sorted terms occurring in at least `min_df` distinct chapters.
pub fn vocabulary(chapters: &[TokenizedChapter], min_df: usize) -> Result<Vec<String>, TextError> {
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for chapter in chapters {
        let distinct: BTreeSet<&str> = chapter.tokens.iter().map(String::as_str).collect();
        for t in distinct {
            *df.entry(t).or_default() += 1;
        }
    }
    let vocab: Vec<String> = df
        .into_iter()
        .filter(|&(_, n)| n >= min_df)
        .map(|(t, _)| t.to_string())
        .collect();
    if vocab.is_empty() {
        return Err(TextError::EmptyVocabulary);
    }
    Ok(vocab)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn chapter(text: &str) -> Chapter {
        Chapter {
            book: BookLabel::Ecclesiasticus,
            index: 0,
            raw_text: text.to_string(),
        }
    }

    fn tok(tokens: &[&str]) -> TokenizedChapter {
        TokenizedChapter {
            book: BookLabel::Wisdom,
            index: 0,
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn lowercases_and_drops_stopwords() {
        let stops = StopwordSet::from_words(["the"]).unwrap();
        let out = clean_and_tokenize(&chapter("The LORD, the lord!"), &stops);
        assert_eq!(out.tokens, ["lord", "lord"]);
    }

    #[test]
    fn verse_markers_and_digits_vanish() {
        let stops = StopwordSet::from_words(["and", "as", "the"]).unwrap();
        let out = clean_and_tokenize(&chapter("47:2. And as the fat"), &stops);
        assert_eq!(out.tokens, ["fat"]);
    }

    #[test]
    fn only_stopwords_gives_empty() {
        let out = clean_and_tokenize(&chapter("and the of, to"), &StopwordSet::english());
        assert!(out.tokens.is_empty());
    }

    #[test]
    fn hyphens_and_apostrophes_split() {
        assert_eq!(tokenize("Gnana-Kanda 'Tis"), ["gnana", "kanda", "tis"]);
    }

    #[test]
    fn archaic_extras_apply() {
        let stops = StopwordSet::english_with_archaic();
        let out = clean_and_tokenize(
            &chapter("Thou hast spoken, and thy word doth stand"),
            &stops,
        );
        assert_eq!(out.tokens, ["spoken", "word", "stand"]);
        assert!(stops.len() > StopwordSet::english().len());
    }

    #[test]
    fn stopword_file_format() {
        let set = parse_stopword_list("# comment\nfoo\n\n bar  # trailing\n").unwrap();
        assert_eq!(set.into_iter().collect::<Vec<_>>(), ["bar", "foo"]);
        assert!(parse_stopword_list("two words").is_err());
        assert!(parse_stopword_list("Upper").is_err());
    }

    #[test]
    fn vocabulary_respects_min_df() {
        let chs = [tok(&["a", "b"]), tok(&["b", "c"])];
        assert_eq!(vocabulary(&chs, 1).unwrap(), ["a", "b", "c"]);
        assert_eq!(vocabulary(&chs, 2).unwrap(), ["b"]);
        assert!(matches!(
            vocabulary(&chs, 3),
            Err(TextError::EmptyVocabulary)
        ));
    }

    #[test]
    fn document_frequency_counts_chapters_not_occurrences() {
        let chs = [tok(&["a", "a", "a"]), tok(&["b"])];
        assert_eq!(vocabulary(&chs, 2).ok(), None);
    }

    proptest! {
        #[test]
        fn tokens_are_clean_and_stable(text in "\\PC{0,200}") {
            let stops = StopwordSet::english_with_archaic();
            let out = clean_and_tokenize(&chapter(&text), &stops);
            for t in &out.tokens {
                prop_assert!(!t.is_empty());
                prop_assert!(t.bytes().all(|b| b.is_ascii_lowercase()));
                prop_assert!(!stops.contains(t));
            }
            let again = clean_and_tokenize(&chapter(&out.tokens.join(" ")), &stops);
            prop_assert_eq!(again.tokens, out.tokens);
        }

        #[test]
        fn vocabulary_shrinks_with_min_df(
            docs in prop::collection::vec(prop::collection::vec("[a-e]", 0..6), 1..6),
            d1 in 1usize..4,
            extra in 0usize..3,
        ) {
            let chs: Vec<_> = docs.iter()
                .map(|d| tok(&d.iter().map(String::as_str).collect::<Vec<_>>()))
                .collect();
            let loose: BTreeSet<String> = vocabulary(&chs, d1).unwrap_or_default().into_iter().collect();
            let strict: BTreeSet<String> = vocabulary(&chs, d1 + extra).unwrap_or_default().into_iter().collect();
            prop_assert!(strict.is_subset(&loose));
        }
    }
}
