//! Chapter distances and the matrices built from them.
//!
//! Kernels walk the union of the two supports in index order. Below
//! [`DENSE_CUTOFF`] dimensions they fall back to a plain dense loop; both
//! paths add the same nonzero terms in the same order, so they agree exactly.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dtm::{DocTermMatrix, RowLabel};
use crate::label::BookLabel;
use crate::sparse::SparseVec;

pub const DENSE_CUTOFF: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimilarityError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("cosine similarity is undefined for a zero vector")]
    ZeroVector,
    #[error("jaccard distance needs non-negative entries")]
    NegativeEntry,
    #[error("book {0} has no chapters in the matrix")]
    UnknownBook(BookLabel),
    #[error("need at least two books, found {0}")]
    TooFewBooks(usize),
}

pub type Result<T, E = SimilarityError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Euclidean,
    Manhattan,
    Cosine,
    Jaccard,
}

impl Measure {
    pub const ALL: [Measure; 4] = [
        Measure::Euclidean,
        Measure::Manhattan,
        Measure::Cosine,
        Measure::Jaccard,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Measure::Euclidean => "euclidean",
            Measure::Manhattan => "manhattan",
            Measure::Cosine => "cosine",
            Measure::Jaccard => "jaccard",
        }
    }

    /// Distance between two rows. Cosine follows the zero-vector policy of
    /// [`dist_cosine`].
    pub fn distance(self, a: &SparseVec, b: &SparseVec) -> Result<f64> {
        self.distance_flagged(a, b).map(|(d, _)| d)
    }

    /// Like [`Measure::distance`], also reporting whether the cosine
    /// zero-vector convention was applied.
    pub fn distance_flagged(self, a: &SparseVec, b: &SparseVec) -> Result<(f64, bool)> {
        match self {
            Measure::Euclidean => dist_euclidean(a, b).map(|d| (d, false)),
            Measure::Manhattan => dist_manhattan(a, b).map(|d| (d, false)),
            Measure::Cosine => dist_cosine(a, b),
            Measure::Jaccard => dist_jaccard(a, b).map(|d| (d, false)),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Measure::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown measure `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregator {
    Min,
    Max,
    Mean,
    Median,
}

impl Aggregator {
    pub const ALL: [Aggregator; 4] = [
        Aggregator::Min,
        Aggregator::Max,
        Aggregator::Mean,
        Aggregator::Median,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Aggregator::Min => "min",
            Aggregator::Max => "max",
            Aggregator::Mean => "mean",
            Aggregator::Median => "median",
        }
    }

    /// `None` on an empty slice. The mean sums in slice order; an even-length
    /// median is the mean of the two middle values.
    pub fn apply(self, values: &[f64]) -> Option<f64> {
        if values.is_empty() {
            return None;
        }
        Some(match self {
            Aggregator::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
            Aggregator::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Aggregator::Mean => values.iter().sum::<f64>() / values.len() as f64,
            Aggregator::Median => {
                let mut sorted = values.to_vec();
                sorted.sort_by(f64::total_cmp);
                let mid = sorted.len() / 2;
                if sorted.len() % 2 == 1 {
                    sorted[mid]
                } else {
                    (sorted[mid - 1] + sorted[mid]) / 2.0
                }
            }
        })
    }
}

impl fmt::Display for Aggregator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Aggregator {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Aggregator::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown aggregator `{s}`"))
    }
}

fn check_dims(a: &SparseVec, b: &SparseVec) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(SimilarityError::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok(())
}

/// Calls `f` on every coordinate pair that may contribute to a sum.
fn for_each_pair(a: &SparseVec, b: &SparseVec, mut f: impl FnMut(f64, f64)) {
    if a.dim() < DENSE_CUTOFF {
        let (da, db) = (a.to_dense(), b.to_dense());
        for (x, y) in da.into_iter().zip(db) {
            f(x, y);
        }
    } else {
        a.merge_with(b, f);
    }
}

pub fn dist_euclidean(a: &SparseVec, b: &SparseVec) -> Result<f64> {
    check_dims(a, b)?;
    let mut sum = 0.0;
    for_each_pair(a, b, |x, y| sum += (x - y) * (x - y));
    Ok(sum.sqrt())
}

pub fn dist_manhattan(a: &SparseVec, b: &SparseVec) -> Result<f64> {
    check_dims(a, b)?;
    let mut sum = 0.0;
    for_each_pair(a, b, |x, y| sum += (x - y).abs());
    Ok(sum)
}

/// `a·b / (‖a‖‖b‖)`, clamped to `[-1, 1]`.
pub fn cosine_similarity(a: &SparseVec, b: &SparseVec) -> Result<f64> {
    check_dims(a, b)?;
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for_each_pair(a, b, |x, y| {
        dot += x * y;
        na += x * x;
        nb += y * y;
    });
    if na == 0.0 || nb == 0.0 {
        return Err(SimilarityError::ZeroVector);
    }
    Ok((dot / (na * nb).sqrt()).clamp(-1.0, 1.0))
}

/// `1 - cosine_similarity`. When either side is the zero vector the distance
/// is taken as 0 for two zero vectors and 1 otherwise, and the flag is set.
pub fn dist_cosine(a: &SparseVec, b: &SparseVec) -> Result<(f64, bool)> {
    match cosine_similarity(a, b) {
        Ok(s) => Ok(((1.0 - s).max(0.0), false)),
        Err(SimilarityError::ZeroVector) => {
            Ok((if a.is_zero() && b.is_zero() { 0.0 } else { 1.0 }, true))
        }
        Err(e) => Err(e),
    }
}

/// Weighted (Ruzicka) Jaccard similarity `Σ min / Σ max`; 1 for two zero
/// vectors.
pub fn jaccard_similarity(a: &SparseVec, b: &SparseVec) -> Result<f64> {
    check_dims(a, b)?;
    if a.values().iter().chain(b.values()).any(|&x| x < 0.0) {
        return Err(SimilarityError::NegativeEntry);
    }
    let (mut lo, mut hi) = (0.0, 0.0);
    for_each_pair(a, b, |x, y| {
        lo += x.min(y);
        hi += x.max(y);
    });
    Ok(if hi == 0.0 { 1.0 } else { lo / hi })
}

pub fn dist_jaccard(a: &SparseVec, b: &SparseVec) -> Result<f64> {
    jaccard_similarity(a, b).map(|s| 1.0 - s)
}

/// Symmetric distance matrix with zero diagonal, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    pub labels: Vec<RowLabel>,
    pub measure: Measure,
    /// Cells where the cosine zero-vector convention was used.
    pub zero_vector_pairs: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    /// Each cell is computed independently, so the result does not depend on
    /// the thread count.
    pub fn compute(rows: &[&SparseVec], labels: Vec<RowLabel>, measure: Measure) -> Result<Self> {
        let n = rows.len();
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        let cells: Vec<(f64, bool)> = pairs
            .par_iter()
            .map(|&(i, j)| measure.distance_flagged(rows[i], rows[j]))
            .collect::<Result<_>>()?;
        let mut d = vec![0.0; n * n];
        let mut zero_vector_pairs = 0;
        for (&(i, j), &(v, flagged)) in pairs.iter().zip(&cells) {
            d[i * n + j] = v;
            d[j * n + i] = v;
            zero_vector_pairs += usize::from(flagged);
        }
        Ok(DistanceMatrix {
            labels,
            measure,
            zero_vector_pairs,
            d,
        })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n() + j]
    }

    pub fn to_csv(&self) -> String {
        let names: Vec<String> = self
            .labels
            .iter()
            .map(|l| format!("{}_{}", l.book, l.chapter))
            .collect();
        let mut out = String::new();
        out.push_str("chapter");
        for name in &names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (i, name) in names.iter().enumerate() {
            out.push_str(name);
            for j in 0..self.n() {
                out.push_str(&format!(",{}", self.get(i, j)));
            }
            out.push('\n');
        }
        out
    }

    /// Long form, one `{row, col, value}` object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for (i, a) in self.labels.iter().enumerate() {
            for (j, b) in self.labels.iter().enumerate() {
                let record = serde_json::json!({
                    "row": format!("{}_{}", a.book, a.chapter),
                    "col": format!("{}_{}", b.book, b.chapter),
                    "value": self.get(i, j),
                });
                out.push_str(&record.to_string());
                out.push('\n');
            }
        }
        out
    }
}

/// Distances among the chapters of one book.
pub fn within_book_matrix(
    dtm: &DocTermMatrix,
    book: BookLabel,
    measure: Measure,
) -> Result<DistanceMatrix> {
    let idx = dtm.rows_of(book);
    if idx.is_empty() {
        return Err(SimilarityError::UnknownBook(book));
    }
    let rows: Vec<&SparseVec> = idx.iter().map(|&i| &dtm.rows[i]).collect();
    let labels = idx.iter().map(|&i| dtm.row_labels[i]).collect();
    DistanceMatrix::compute(&rows, labels, measure)
}

/// Distances among all rows of the matrix.
pub fn full_matrix(dtm: &DocTermMatrix, measure: Measure) -> Result<DistanceMatrix> {
    let rows: Vec<&SparseVec> = dtm.rows.iter().collect();
    DistanceMatrix::compute(&rows, dtm.row_labels.clone(), measure)
}

/// Book-by-book aggregate of chapter distances. Missing cells (a diagonal of
/// a one-chapter book) are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BookDistanceMatrix {
    pub books: Vec<BookLabel>,
    pub measure: Measure,
    pub aggregator: Aggregator,
    delta: Vec<Option<f64>>,
}

impl BookDistanceMatrix {
    /// Assembles from explicit cells, row-major. Panics unless
    /// `delta.len() == books.len()²`.
    pub fn from_cells(
        books: Vec<BookLabel>,
        measure: Measure,
        aggregator: Aggregator,
        delta: Vec<Option<f64>>,
    ) -> Self {
        assert_eq!(delta.len(), books.len() * books.len());
        BookDistanceMatrix {
            books,
            measure,
            aggregator,
            delta,
        }
    }

    /// Aggregates a full chapter matrix. For a pair of books `a` before `b`
    /// in label order the values are gathered with `a`'s chapters in the
    /// outer loop; the diagonal uses distinct pairs `i < j`.
    pub fn from_chapters(full: &DistanceMatrix, aggregator: Aggregator) -> Result<Self> {
        let mut books: Vec<BookLabel> = full.labels.iter().map(|l| l.book).collect();
        books.sort();
        books.dedup();
        if books.len() < 2 {
            return Err(SimilarityError::TooFewBooks(books.len()));
        }
        let members: Vec<Vec<usize>> = books
            .iter()
            .map(|&b| {
                (0..full.n())
                    .filter(|&i| full.labels[i].book == b)
                    .collect()
            })
            .collect();
        let m = books.len();
        let mut delta = vec![None; m * m];
        for a in 0..m {
            for b in a..m {
                let mut values = Vec::new();
                for (p, &i) in members[a].iter().enumerate() {
                    let inner = if a == b {
                        &members[b][p + 1..]
                    } else {
                        &members[b][..]
                    };
                    values.extend(inner.iter().map(|&j| full.get(i, j)));
                }
                let v = aggregator.apply(&values);
                delta[a * m + b] = v;
                delta[b * m + a] = v;
            }
        }
        Ok(BookDistanceMatrix {
            books,
            measure: full.measure,
            aggregator,
            delta,
        })
    }

    pub fn len(&self) -> usize {
        self.books.len()
    }

    pub fn is_empty(&self) -> bool {
        self.books.is_empty()
    }

    pub fn position(&self, book: BookLabel) -> Option<usize> {
        self.books.iter().position(|&b| b == book)
    }

    pub fn cell(&self, a: usize, b: usize) -> Option<f64> {
        self.delta[a * self.len() + b]
    }

    pub fn get(&self, a: BookLabel, b: BookLabel) -> Option<f64> {
        Some(self.cell(self.position(a)?, self.position(b)?)).flatten()
    }

    /// Smallest off-diagonal entry; ties go to the first pair in row-major
    /// order.
    pub fn min_off_diagonal(&self) -> Option<(BookLabel, BookLabel, f64)> {
        let mut best: Option<(BookLabel, BookLabel, f64)> = None;
        for a in 0..self.len() {
            for b in a + 1..self.len() {
                if let Some(v) = self.cell(a, b) {
                    if best.is_none_or(|(_, _, bv)| v < bv) {
                        best = Some((self.books[a], self.books[b], v));
                    }
                }
            }
        }
        best
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("book");
        for b in &self.books {
            out.push(',');
            out.push_str(b.display_name());
        }
        out.push('\n');
        for (a, book) in self.books.iter().enumerate() {
            out.push_str(book.display_name());
            for b in 0..self.len() {
                match self.cell(a, b) {
                    Some(v) => out.push_str(&format!(",{v}")),
                    None => out.push_str(",NA"),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for (a, row) in self.books.iter().enumerate() {
            for (b, col) in self.books.iter().enumerate() {
                let record = serde_json::json!({
                    "row": row.display_name(),
                    "col": col.display_name(),
                    "value": self.cell(a, b),
                });
                out.push_str(&record.to_string());
                out.push('\n');
            }
        }
        out
    }

    /// Parses the CSV written by [`BookDistanceMatrix::to_csv`].
    pub fn from_csv(
        text: &str,
        measure: Measure,
        aggregator: Aggregator,
    ) -> std::result::Result<Self, String> {
        let mut lines = text.lines();
        let header = lines.next().ok_or("empty matrix file")?;
        let books = header
            .split(',')
            .skip(1)
            .map(|s| s.parse::<BookLabel>().map_err(|e| e.to_string()))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let mut delta = Vec::with_capacity(books.len() * books.len());
        for line in lines {
            for cell in line.split(',').skip(1) {
                delta.push(match cell {
                    "NA" => None,
                    v => Some(
                        v.parse::<f64>()
                            .map_err(|e| format!("bad cell `{v}`: {e}"))?,
                    ),
                });
            }
        }
        if delta.len() != books.len() * books.len() {
            return Err("matrix is not square".into());
        }
        Ok(BookDistanceMatrix {
            books,
            measure,
            aggregator,
            delta,
        })
    }
}

pub fn between_book_matrix(
    dtm: &DocTermMatrix,
    measure: Measure,
    aggregator: Aggregator,
) -> Result<BookDistanceMatrix> {
    if dtm.books().len() < 2 {
        return Err(SimilarityError::TooFewBooks(dtm.books().len()));
    }
    BookDistanceMatrix::from_chapters(&full_matrix(dtm, measure)?, aggregator)
}
