//! Document-term matrix construction, weighting and on-disk exchange.
//!
//! On disk a matrix is three files in one directory:
//!
//! * `matrix.mtx`: MatrixMarket coordinate format, 1-based indices, with a
//!   `% weighting: <kind>` comment line,
//! * `vocab.txt`: one term per line, column order,
//! * `rows.csv`: `row,book,chapter` with the book display name.
//!
//! Values are written in shortest round-trip form, so a save/load cycle
//! reproduces every entry bit for bit.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::label::BookLabel;
use crate::sparse::SparseVec;
use crate::textprep::TokenizedChapter;

pub const MATRIX_FILE: &str = "matrix.mtx";
pub const VOCAB_FILE: &str = "vocab.txt";
pub const ROWS_FILE: &str = "rows.csv";

#[derive(Debug, thiserror::Error)]
pub enum DtmError {
    #[error("vocabulary is empty")]
    EmptyVocabulary,
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    /// Count of term j in chapter i.
    #[default]
    RawFrequency,
    /// `ln(1 + f_ij / N_i)` with `N_i` the chapter's in-vocabulary token count.
    LogRelativeFrequency,
}

impl Weighting {
    pub fn as_str(self) -> &'static str {
        match self {
            Weighting::RawFrequency => "raw-frequency",
            Weighting::LogRelativeFrequency => "log-relative-frequency",
        }
    }
}

impl fmt::Display for Weighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Weighting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "raw-frequency" => Ok(Weighting::RawFrequency),
            "log-relative-frequency" => Ok(Weighting::LogRelativeFrequency),
            other => Err(format!("unknown weighting `{other}`")),
        }
    }
}

/// Identifies the chapter behind a matrix row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RowLabel {
    pub book: BookLabel,
    pub chapter: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DocTermMatrix {
    pub vocab: Vec<String>,
    pub rows: Vec<SparseVec>,
    pub row_labels: Vec<RowLabel>,
    pub weighting: Weighting,
}

impl DocTermMatrix {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn p(&self) -> usize {
        self.vocab.len()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(SparseVec::nnz).sum()
    }

    /// Books present, in label order.
    pub fn books(&self) -> Vec<BookLabel> {
        let mut books: Vec<BookLabel> = self.row_labels.iter().map(|r| r.book).collect();
        books.sort();
        books.dedup();
        books
    }

    /// Row indices of one book, in matrix order.
    pub fn rows_of(&self, book: BookLabel) -> Vec<usize> {
        self.row_labels
            .iter()
            .enumerate()
            .filter(|(_, r)| r.book == book)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn labels(&self) -> Vec<BookLabel> {
        self.row_labels.iter().map(|r| r.book).collect()
    }
}

pub fn build_dtm(
    chapters: &[TokenizedChapter],
    vocab: &[String],
    weighting: Weighting,
) -> Result<DocTermMatrix, DtmError> {
    if vocab.is_empty() {
        return Err(DtmError::EmptyVocabulary);
    }
    let column: HashMap<&str, u32> = vocab
        .iter()
        .enumerate()
        .map(|(j, t)| (t.as_str(), j as u32))
        .collect();
    let p = vocab.len();
    let rows = chapters
        .par_iter()
        .map(|ch| {
            let counts = SparseVec::from_pairs(
                p,
                ch.tokens
                    .iter()
                    .filter_map(|t| column.get(t.as_str()).map(|&j| (j, 1.0)))
                    .collect(),
            );
            match weighting {
                Weighting::RawFrequency => counts,
                Weighting::LogRelativeFrequency => {
                    let total = counts.sum();
                    if total == 0.0 {
                        counts
                    } else {
                        SparseVec::from_pairs(
                            p,
                            counts
                                .iter()
                                .map(|(j, f)| (j as u32, (f / total).ln_1p()))
                                .collect(),
                        )
                    }
                }
            }
        })
        .collect();
    Ok(DocTermMatrix {
        vocab: vocab.to_vec(),
        rows,
        row_labels: chapters
            .iter()
            .map(|c| RowLabel {
                book: c.book,
                chapter: c.index,
            })
            .collect(),
        weighting,
    })
}

/// Fraction of zero entries.
pub fn sparsity(dtm: &DocTermMatrix) -> f64 {
    let cells = dtm.n() * dtm.p();
    if cells == 0 {
        return 1.0;
    }
    (cells - dtm.nnz()) as f64 / cells as f64
}

fn io_err(path: &Path) -> impl Fn(io::Error) -> DtmError + '_ {
    move |source| DtmError::Io {
        path: path.into(),
        source,
    }
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> DtmError {
    DtmError::Parse {
        path: path.into(),
        line,
        msg: msg.into(),
    }
}

pub fn write_matrix_market<W: Write>(dtm: &DocTermMatrix, mut w: W) -> io::Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "% weighting: {}", dtm.weighting)?;
    writeln!(w, "{} {} {}", dtm.n(), dtm.p(), dtm.nnz())?;
    for (i, row) in dtm.rows.iter().enumerate() {
        for (j, x) in row.iter() {
            writeln!(w, "{} {} {}", i + 1, j + 1, x)?;
        }
    }
    w.flush()
}

/// Writes `matrix.mtx`, `vocab.txt` and `rows.csv` into `dir`.
pub fn save(dtm: &DocTermMatrix, dir: &Path) -> Result<(), DtmError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(MATRIX_FILE);
    let file = fs::File::create(&path).map_err(io_err(&path))?;
    write_matrix_market(dtm, BufWriter::new(file)).map_err(io_err(&path))?;

    let path = dir.join(VOCAB_FILE);
    let mut vocab = String::new();
    for t in &dtm.vocab {
        vocab.push_str(t);
        vocab.push('\n');
    }
    fs::write(&path, vocab).map_err(io_err(&path))?;

    let path = dir.join(ROWS_FILE);
    let mut rows = String::from("row,book,chapter\n");
    for (i, r) in dtm.row_labels.iter().enumerate() {
        rows.push_str(&format!("{},{},{}\n", i + 1, r.book, r.chapter));
    }
    fs::write(&path, rows).map_err(io_err(&path))
}

pub fn load(dir: &Path) -> Result<DocTermMatrix, DtmError> {
    let path = dir.join(VOCAB_FILE);
    let vocab: Vec<String> = fs::read_to_string(&path)
        .map_err(io_err(&path))?
        .lines()
        .map(str::to_string)
        .collect();

    let path = dir.join(ROWS_FILE);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let mut row_labels = Vec::new();
    for (lineno, line) in text.lines().enumerate().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let [_, book, chapter] = fields[..] else {
            return Err(parse_err(&path, lineno + 1, "expected 3 fields"));
        };
        let book = book
            .parse()
            .map_err(|e: crate::label::UnknownLabel| parse_err(&path, lineno + 1, e.to_string()))?;
        let chapter = chapter
            .parse()
            .map_err(|_| parse_err(&path, lineno + 1, "bad chapter index"))?;
        row_labels.push(RowLabel { book, chapter });
    }

    let path = dir.join(MATRIX_FILE);
    let file = fs::File::open(&path).map_err(io_err(&path))?;
    let (weighting, rows) = read_matrix_market(BufReader::new(file), &path)?;
    if rows.len() != row_labels.len() {
        return Err(parse_err(&path, 0, "row count disagrees with rows.csv"));
    }
    if rows.first().is_some_and(|r| r.dim() != vocab.len()) {
        return Err(parse_err(&path, 0, "column count disagrees with vocab.txt"));
    }
    Ok(DocTermMatrix {
        vocab,
        rows,
        row_labels,
        weighting,
    })
}

fn read_matrix_market<R: BufRead>(
    reader: R,
    path: &Path,
) -> Result<(Weighting, Vec<SparseVec>), DtmError> {
    let mut weighting = Weighting::RawFrequency;
    let mut shape: Option<(usize, usize)> = None;
    let mut entries: Vec<Vec<(u32, f64)>> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let lineno = lineno + 1;
        if let Some(comment) = line.strip_prefix('%') {
            if let Some(w) = comment.trim().strip_prefix("weighting:") {
                weighting = w
                    .trim()
                    .parse()
                    .map_err(|e: String| parse_err(path, lineno, e))?;
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 3 {
            return Err(parse_err(path, lineno, "expected 3 fields"));
        }
        match shape {
            None => {
                let n = fields[0]
                    .parse()
                    .map_err(|_| parse_err(path, lineno, "bad n"))?;
                let p = fields[1]
                    .parse()
                    .map_err(|_| parse_err(path, lineno, "bad p"))?;
                shape = Some((n, p));
                entries = vec![Vec::new(); n];
            }
            Some((n, p)) => {
                let i: usize = fields[0]
                    .parse()
                    .map_err(|_| parse_err(path, lineno, "bad row"))?;
                let j: usize = fields[1]
                    .parse()
                    .map_err(|_| parse_err(path, lineno, "bad column"))?;
                let x: f64 = fields[2]
                    .parse()
                    .map_err(|_| parse_err(path, lineno, "bad value"))?;
                if i == 0 || i > n || j == 0 || j > p {
                    return Err(parse_err(path, lineno, "index out of range"));
                }
                entries[i - 1].push(((j - 1) as u32, x));
            }
        }
    }
    let (_, p) = shape.ok_or_else(|| parse_err(path, 0, "missing size line"))?;
    Ok((
        weighting,
        entries
            .into_iter()
            .map(|e| SparseVec::from_pairs(p, e))
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn chapter(book: BookLabel, index: usize, tokens: &[&str]) -> TokenizedChapter {
        TokenizedChapter {
            book,
            index,
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn vocab(terms: &[&str]) -> Vec<String> {
        terms.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn raw_counts() {
        let dtm = build_dtm(
            &[chapter(BookLabel::Wisdom, 0, &["a", "b", "a", "zzz"])],
            &vocab(&["a", "b", "c"]),
            Weighting::RawFrequency,
        )
        .unwrap();
        assert_eq!(dtm.rows[0].to_dense(), [2.0, 1.0, 0.0]);
        assert_eq!(
            dtm.row_labels[0],
            RowLabel {
                book: BookLabel::Wisdom,
                chapter: 0
            }
        );
    }

    #[test]
    fn log_relative_frequency() {
        let dtm = build_dtm(
            &[chapter(BookLabel::Wisdom, 0, &["a", "b", "a"])],
            &vocab(&["a", "b", "c"]),
            Weighting::LogRelativeFrequency,
        )
        .unwrap();
        let row = dtm.rows[0].to_dense();
        // ln(5/3), ln(4/3)
        assert!((row[0] - 0.5108256237659907).abs() < 1e-12);
        assert!((row[1] - 0.287_682_072_451_780_9).abs() < 1e-12);
        assert_eq!(row[2], 0.0);
    }

    #[test]
    fn empty_chapter_gives_zero_row() {
        for w in [Weighting::RawFrequency, Weighting::LogRelativeFrequency] {
            let dtm = build_dtm(&[chapter(BookLabel::Wisdom, 0, &[])], &vocab(&["a"]), w).unwrap();
            assert!(dtm.rows[0].is_zero());
        }
    }

    #[test]
    fn empty_vocab_rejected() {
        assert!(matches!(
            build_dtm(&[], &[], Weighting::RawFrequency),
            Err(DtmError::EmptyVocabulary)
        ));
    }

    #[test]
    fn sparsity_fraction() {
        let one = build_dtm(
            &[chapter(BookLabel::Wisdom, 0, &["a", "b", "a"])],
            &vocab(&["a", "b", "c"]),
            Weighting::RawFrequency,
        )
        .unwrap();
        assert!((sparsity(&one) - 1.0 / 3.0).abs() < 1e-15);
        let zeros = build_dtm(
            &[
                chapter(BookLabel::Wisdom, 0, &[]),
                chapter(BookLabel::Wisdom, 1, &[]),
            ],
            &vocab(&["a", "b"]),
            Weighting::RawFrequency,
        )
        .unwrap();
        assert_eq!(sparsity(&zeros), 1.0);
    }

    #[test]
    fn save_load_round_trip_is_exact() {
        let chs = [
            chapter(BookLabel::TaoTeChing, 0, &["way", "way", "name"]),
            chapter(BookLabel::Upanishad, 3, &["self", "way", "self", "self"]),
            chapter(BookLabel::Upanishad, 4, &[]),
        ];
        let v = vocab(&["name", "self", "way"]);
        let dir = tempfile::tempdir().unwrap();
        for w in [Weighting::RawFrequency, Weighting::LogRelativeFrequency] {
            let dtm = build_dtm(&chs, &v, w).unwrap();
            save(&dtm, dir.path()).unwrap();
            assert_eq!(load(dir.path()).unwrap(), dtm);
        }
    }

    #[test]
    fn malformed_matrix_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let dtm = build_dtm(
            &[chapter(BookLabel::Wisdom, 0, &["a"])],
            &vocab(&["a"]),
            Weighting::RawFrequency,
        )
        .unwrap();
        save(&dtm, dir.path()).unwrap();
        fs::write(
            dir.path().join(MATRIX_FILE),
            "%%MatrixMarket\n1 1 1\n2 1 1\n",
        )
        .unwrap();
        assert!(matches!(
            load(dir.path()),
            Err(DtmError::Parse { line: 3, .. })
        ));
    }

    proptest! {
        #[test]
        fn weighting_invariants(docs in prop::collection::vec(prop::collection::vec("[a-f]", 0..12), 1..5)) {
            let chs: Vec<_> = docs.iter().enumerate()
                .map(|(i, d)| chapter(BookLabel::Proverb, i, &d.iter().map(String::as_str).collect::<Vec<_>>()))
                .collect();
            let v = vocab(&["a", "b", "c", "d"]);
            let raw = build_dtm(&chs, &v, Weighting::RawFrequency).unwrap();
            let log = build_dtm(&chs, &v, Weighting::LogRelativeFrequency).unwrap();
            for (i, ch) in chs.iter().enumerate() {
                let in_vocab = ch.tokens.iter().filter(|t| v.contains(t)).count();
                prop_assert_eq!(raw.rows[i].sum(), in_vocab as f64);
                for (_, x) in log.rows[i].iter() {
                    prop_assert!(x > 0.0 && x <= std::f64::consts::LN_2);
                }
            }
            prop_assert_eq!(build_dtm(&chs, &v, Weighting::RawFrequency).unwrap(), raw);
        }
    }
}
