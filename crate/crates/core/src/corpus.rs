//! Loading book texts and cutting them into labeled chapters.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use regex::{Regex, RegexBuilder};
use serde::{Deserialize, Serialize};

use crate::label::BookLabel;

/// Separator placed between files of a pre-split directory inside
/// [`RawBook::text`].
pub const PART_SEPARATOR: char = '\u{c}';

pub const DEFAULT_NUMBERED_PATTERN: &str =
    r"^[ \t]*(?:CHAPTER|Chapter|Ch\.)?[ \t]*(?:[0-9]+|[IVXLCDM]+)\.?[ \t]*$";
pub const DEFAULT_VERSE_PATTERN: &str = r"(\d+):(\d+)\.";

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("{} contains no text outside the boilerplate", .0.display())]
    EmptyAfterStrip(PathBuf),
    #[error("{} is not a directory", .0.display())]
    NotADirectory(PathBuf),
    #[error("reading {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("bad segmentation pattern `{pattern}`: {source}")]
    BadPattern {
        pattern: String,
        source: regex::Error,
    },
    #[error("verse pattern `{0}` needs a capture group for the chapter number")]
    MissingCaptureGroup(String),
    #[error("unknown segmentation rule `{0}`")]
    UnknownRule(String),
    #[error("segmentation rule found no chapters in {0}")]
    NoChaptersFound(BookLabel),
    #[error("book {0} appears more than once")]
    DuplicateLabel(BookLabel),
    #[error("no books given")]
    EmptyCorpus,
}

pub type Result<T, E = CorpusError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SegKind {
    /// Split at heading lines carrying a chapter number.
    NumberedChapter,
    /// Group verses `N:M.` by their chapter number `N`.
    VersePrefix,
    /// Split at lines matching a user regex.
    HeadingRegex,
    /// One chapter per file of a directory, in file-name order.
    PreSplitDirectory,
}

impl SegKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SegKind::NumberedChapter => "numbered-chapter",
            SegKind::VersePrefix => "verse-prefix",
            SegKind::HeadingRegex => "heading-regex",
            SegKind::PreSplitDirectory => "pre-split-directory",
        }
    }
}

impl fmt::Display for SegKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SegKind {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self> {
        [
            SegKind::NumberedChapter,
            SegKind::VersePrefix,
            SegKind::HeadingRegex,
            SegKind::PreSplitDirectory,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
        .ok_or_else(|| CorpusError::UnknownRule(s.to_string()))
    }
}

/// A validated segmentation rule.
#[derive(Debug, Clone)]
pub struct SegRule {
    kind: SegKind,
    pattern: String,
    regex: Option<Regex>,
}

impl SegRule {
    /// An empty `pattern` selects the rule's default, where it has one.
    pub fn new(kind: SegKind, pattern: &str) -> Result<Self> {
        let pattern = match (kind, pattern.is_empty()) {
            (SegKind::NumberedChapter, true) => DEFAULT_NUMBERED_PATTERN,
            (SegKind::VersePrefix, true) => DEFAULT_VERSE_PATTERN,
            _ => pattern,
        };
        let regex = match kind {
            SegKind::PreSplitDirectory => None,
            SegKind::HeadingRegex if pattern.is_empty() => {
                return Err(CorpusError::BadPattern {
                    pattern: String::new(),
                    source: regex::Error::Syntax("heading-regex needs a pattern".into()),
                })
            }
            _ => {
                let re = RegexBuilder::new(pattern)
                    .multi_line(true)
                    .build()
                    .map_err(|source| CorpusError::BadPattern {
                        pattern: pattern.to_string(),
                        source,
                    })?;
                if kind == SegKind::VersePrefix && re.captures_len() < 2 {
                    return Err(CorpusError::MissingCaptureGroup(pattern.to_string()));
                }
                Some(re)
            }
        };
        Ok(SegRule {
            kind,
            pattern: pattern.to_string(),
            regex,
        })
    }

    pub fn numbered_chapter() -> Self {
        SegRule::new(SegKind::NumberedChapter, "").expect("default pattern compiles")
    }

    pub fn verse_prefix() -> Self {
        SegRule::new(SegKind::VersePrefix, "").expect("default pattern compiles")
    }

    pub fn heading(pattern: &str) -> Result<Self> {
        SegRule::new(SegKind::HeadingRegex, pattern)
    }

    pub fn pre_split_directory() -> Self {
        SegRule::new(SegKind::PreSplitDirectory, "").expect("no pattern")
    }

    pub fn kind(&self) -> SegKind {
        self.kind
    }

    pub fn pattern(&self) -> &str {
        &self.pattern
    }
}

#[derive(Debug, Clone)]
pub struct RawBook {
    pub label: BookLabel,
    pub source_path: PathBuf,
    pub text: String,
    pub rule: SegRule,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chapter {
    pub book: BookLabel,
    pub index: usize,
    pub raw_text: String,
}

#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub chapters: Vec<Chapter>,
    pub per_book_counts: BTreeMap<BookLabel, usize>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.chapters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chapters.is_empty()
    }

    pub fn manifest(&self) -> Vec<ManifestRecord> {
        self.chapters
            .iter()
            .map(|c| ManifestRecord {
                book: c.book,
                index: c.index,
                n_chars: c.raw_text.chars().count(),
            })
            .collect()
    }
}

/// One line of the corpus manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub book: BookLabel,
    pub index: usize,
    pub n_chars: usize,
}

fn sentinel(kind: &str) -> Regex {
    RegexBuilder::new(&format!(r"^\*\*\*[ \t]*{kind} OF[^\n]*$"))
        .multi_line(true)
        .case_insensitive(true)
        .build()
        .expect("sentinel regex compiles")
}

/// Returns the text strictly between the Project Gutenberg `*** START OF` and
/// `*** END OF` sentinel lines. Either sentinel may be absent; without both
/// the text comes back unchanged.
pub fn strip_boilerplate(text: &str) -> &str {
    let start = sentinel("START").find(text).map_or(0, |m| m.end());
    let end = sentinel("END")
        .find_at(text, start)
        .map_or(text.len(), |m| m.start());
    &text[start..end]
}

fn read_text(path: &Path) -> Result<String> {
    match fs::read(path) {
        Ok(bytes) => Ok(String::from_utf8_lossy(&bytes).into_owned()),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Err(CorpusError::MissingFile(path.into())),
        Err(source) => Err(CorpusError::Io {
            path: path.into(),
            source,
        }),
    }
}

fn stripped(path: &Path) -> Result<String> {
    let text = read_text(path)?;
    let body = strip_boilerplate(&text);
    if body.trim().is_empty() {
        return Err(CorpusError::EmptyAfterStrip(path.into()));
    }
    Ok(body.to_string())
}

/// Reads one book. For a pre-split directory the files are read in name order
/// and joined with [`PART_SEPARATOR`].
pub fn load_book(path: &Path, label: BookLabel, rule: SegRule) -> Result<RawBook> {
    let text = if rule.kind == SegKind::PreSplitDirectory {
        if !path.exists() {
            return Err(CorpusError::MissingFile(path.into()));
        }
        if !path.is_dir() {
            return Err(CorpusError::NotADirectory(path.into()));
        }
        let io_err = |source| CorpusError::Io {
            path: path.into(),
            source,
        };
        let mut files = Vec::new();
        for entry in fs::read_dir(path).map_err(io_err)? {
            let entry = entry.map_err(io_err)?;
            let name = entry.file_name();
            if entry.path().is_file() && !name.to_string_lossy().starts_with('.') {
                files.push(entry.path());
            }
        }
        files.sort();
        let parts = files
            .iter()
            .map(|f| Ok(stripped(f)?.replace(PART_SEPARATOR, " ")))
            .collect::<Result<Vec<_>>>()?;
        if parts.is_empty() {
            return Err(CorpusError::EmptyAfterStrip(path.into()));
        }
        parts.join(&format!("\n{PART_SEPARATOR}\n"))
    } else {
        stripped(path)?
    };
    Ok(RawBook {
        label,
        source_path: path.into(),
        text,
        rule,
    })
}

/// Cuts a book into chapters, in order of appearance. Text before the first
/// heading or verse marker is discarded, as are empty chapters.
pub fn segment(book: &RawBook) -> Result<Vec<Chapter>> {
    let texts: Vec<String> = match book.rule.kind {
        SegKind::PreSplitDirectory => book
            .text
            .split(PART_SEPARATOR)
            .map(|s| s.trim().to_string())
            .collect(),
        SegKind::NumberedChapter | SegKind::HeadingRegex => {
            let re = book.rule.regex.as_ref().expect("regex rule");
            let starts: Vec<(usize, usize)> = re
                .find_iter(&book.text)
                .map(|m| (m.start(), m.end()))
                .collect();
            starts
                .iter()
                .enumerate()
                .map(|(i, &(_, body_start))| {
                    let body_end = starts.get(i + 1).map_or(book.text.len(), |s| s.0);
                    book.text[body_start..body_end].trim().to_string()
                })
                .collect()
        }
        SegKind::VersePrefix => {
            let re = book.rule.regex.as_ref().expect("regex rule");
            let markers: Vec<(String, usize, usize)> = re
                .captures_iter(&book.text)
                .map(|c| {
                    let whole = c.get(0).unwrap();
                    let chapter = c.get(1).map_or("", |m| m.as_str()).to_string();
                    (chapter, whole.start(), whole.end())
                })
                .collect();
            let mut order: Vec<String> = Vec::new();
            let mut verses: BTreeMap<String, Vec<String>> = BTreeMap::new();
            for (i, (chapter, _, body_start)) in markers.iter().enumerate() {
                let body_end = markers.get(i + 1).map_or(book.text.len(), |m| m.1);
                let verse = book.text[*body_start..body_end].trim();
                if !verses.contains_key(chapter) {
                    order.push(chapter.clone());
                }
                let entry = verses.entry(chapter.clone()).or_default();
                if !verse.is_empty() {
                    entry.push(verse.to_string());
                }
            }
            order.into_iter().map(|c| verses[&c].join(" ")).collect()
        }
    };
    let chapters: Vec<Chapter> = texts
        .into_iter()
        .filter(|t| !t.is_empty())
        .enumerate()
        .map(|(index, raw_text)| Chapter {
            book: book.label,
            index,
            raw_text,
        })
        .collect();
    if chapters.is_empty() {
        return Err(CorpusError::NoChaptersFound(book.label));
    }
    Ok(chapters)
}

/// Segments every book and concatenates the chapters in the order given.
pub fn build_corpus(books: &[RawBook]) -> Result<Corpus> {
    if books.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let mut corpus = Corpus::default();
    for book in books {
        if corpus.per_book_counts.contains_key(&book.label) {
            return Err(CorpusError::DuplicateLabel(book.label));
        }
        let chapters = segment(book)?;
        corpus.per_book_counts.insert(book.label, chapters.len());
        corpus.chapters.extend(chapters);
    }
    Ok(corpus)
}
