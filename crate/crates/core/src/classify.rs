//! Book-label prediction benchmark: train/test split, three classifiers and
//! confusion matrices.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dtm::DocTermMatrix;
use crate::label::BookLabel;
use crate::rng::rng_for;
use crate::similarity::{Measure, SimilarityError};
use crate::sparse::SparseVec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClassifyError {
    #[error("book {0} has fewer than two chapters; cannot stratify")]
    TooFewChapters(BookLabel),
    #[error("need at least two rows to split")]
    TooFewRows,
    #[error("train_fraction must lie strictly between 0 and 1, got {0}")]
    BadFraction(f64),
    #[error("training set is empty")]
    EmptyTrain,
    #[error("predicted and actual label lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error(transparent)]
    Distance(#[from] SimilarityError),
}

pub type Result<T, E = ClassifyError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.7,
            seed: 0,
            stratified: true,
        }
    }
}

fn train_count(n: usize, fraction: f64) -> usize {
    ((n as f64 * fraction).round() as usize).clamp(1, n - 1)
}

/// Returns sorted `(train, test)` row indices. A stratified split shuffles
/// each book's rows separately and keeps `round(fraction · n_book)` of them,
/// at least one on each side.
pub fn split(labels: &[BookLabel], spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(ClassifyError::BadFraction(spec.train_fraction));
    }
    if labels.len() < 2 {
        return Err(ClassifyError::TooFewRows);
    }
    let mut rng = rng_for(spec.seed, 0);
    let groups: Vec<Vec<usize>> = if spec.stratified {
        let mut books: Vec<BookLabel> = labels.to_vec();
        books.sort();
        books.dedup();
        books
            .into_iter()
            .map(|b| {
                let rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == b).collect();
                if rows.len() < 2 {
                    Err(ClassifyError::TooFewChapters(b))
                } else {
                    Ok(rows)
                }
            })
            .collect::<Result<_>>()?
    } else {
        vec![(0..labels.len()).collect()]
    };
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for mut rows in groups {
        rows.shuffle(&mut rng);
        let cut = train_count(rows.len(), spec.train_fraction);
        train.extend_from_slice(&rows[..cut]);
        test.extend_from_slice(&rows[cut..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// How many features a forest split samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureRule {
    /// `⌈√p⌉`
    Sqrt,
    All,
    Count(usize),
}

impl FeatureRule {
    pub fn resolve(self, p: usize) -> usize {
        match self {
            FeatureRule::Sqrt => (p as f64).sqrt().ceil() as usize,
            FeatureRule::All => p,
            FeatureRule::Count(m) => m,
        }
        .clamp(1, p.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ClassifierSpec {
    Knn {
        k: usize,
        measure: Measure,
    },
    SvmLinear {
        lambda: f64,
        epochs: usize,
        standardize: bool,
    },
    RandomForest {
        n_trees: usize,
        max_depth: Option<usize>,
        features: FeatureRule,
        bootstrap: bool,
    },
}

impl ClassifierSpec {
    pub fn knn() -> Self {
        ClassifierSpec::Knn {
            k: 5,
            measure: Measure::Euclidean,
        }
    }

    pub fn svm_linear() -> Self {
        ClassifierSpec::SvmLinear {
            lambda: 1e-4,
            epochs: 50,
            standardize: true,
        }
    }

    pub fn random_forest() -> Self {
        ClassifierSpec::RandomForest {
            n_trees: 100,
            max_depth: None,
            features: FeatureRule::Sqrt,
            bootstrap: true,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ClassifierSpec::Knn { .. } => "knn",
            ClassifierSpec::SvmLinear { .. } => "svm-linear",
            ClassifierSpec::RandomForest { .. } => "random-forest",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(ClassifyError::InvalidHyperparameter(m.to_string()));
        match *self {
            ClassifierSpec::Knn { k: 0, .. } => bad("knn k must be at least 1"),
            ClassifierSpec::SvmLinear { lambda, .. } if !(lambda > 0.0 && lambda.is_finite()) => {
                bad("svm lambda must be positive")
            }
            ClassifierSpec::SvmLinear { epochs: 0, .. } => bad("svm epochs must be at least 1"),
            ClassifierSpec::RandomForest { n_trees: 0, .. } => {
                bad("forest needs at least one tree")
            }
            ClassifierSpec::RandomForest {
                max_depth: Some(0), ..
            } => bad("forest max_depth must be at least 1"),
            ClassifierSpec::RandomForest {
                features: FeatureRule::Count(0),
                ..
            } => bad("forest must sample at least one feature"),
            _ => Ok(()),
        }
    }
}

/// Most frequent label; ties go to the smallest label id.
fn majority(votes: &[usize; BookLabel::COUNT]) -> BookLabel {
    let mut best = 0;
    for c in 1..BookLabel::COUNT {
        if votes[c] > votes[best] {
            best = c;
        }
    }
    BookLabel::from_index(best).unwrap()
}

fn knn_predict(
    train: &[&SparseVec],
    labels: &[BookLabel],
    test: &[&SparseVec],
    k: usize,
    measure: Measure,
) -> Result<Vec<BookLabel>> {
    test.par_iter()
        .map(|x| {
            let mut dists: Vec<(f64, usize)> = train
                .iter()
                .enumerate()
                .map(|(i, t)| Ok((measure.distance(x, t)?, i)))
                .collect::<Result<_>>()?;
            dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut votes = [0usize; BookLabel::COUNT];
            for &(_, i) in dists.iter().take(k) {
                votes[labels[i].index()] += 1;
            }
            Ok(majority(&votes))
        })
        .collect()
}

/// Column statistics used to standardize SVM inputs.
struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    fn fit(rows: &[&SparseVec], p: usize, enabled: bool) -> Self {
        if !enabled {
            return Standardizer {
                mean: vec![0.0; p],
                scale: vec![1.0; p],
            };
        }
        let n = rows.len() as f64;
        let mut mean = vec![0.0; p];
        for r in rows {
            for (j, x) in r.iter() {
                mean[j] += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var: Vec<f64> = mean.iter().map(|m| m * m * n).collect();
        for r in rows {
            for (j, x) in r.iter() {
                var[j] += (x - mean[j]) * (x - mean[j]) - mean[j] * mean[j];
            }
        }
        let scale = var
            .into_iter()
            .map(|v| {
                let sd = (v.max(0.0) / n).sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    /// Dense standardized row with a trailing bias feature.
    fn transform(&self, x: &SparseVec) -> Vec<f64> {
        let mut z: Vec<f64> = self
            .mean
            .iter()
            .zip(&self.scale)
            .map(|(m, s)| -m / s)
            .collect();
        for (j, v) in x.iter() {
            z[j] = (v - self.mean[j]) / self.scale[j];
        }
        z.push(1.0);
        z
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Pegasos hinge-loss solver for one class against the rest. The weight
/// vector is kept as `scale · v` so the per-step shrink is O(1).
fn pegasos(z: &[Vec<f64>], y: &[f64], lambda: f64, epochs: usize, rng: &mut impl Rng) -> Vec<f64> {
    let dim = z[0].len();
    let mut v = vec![0.0; dim];
    let mut scale = 1.0;
    let mut order: Vec<usize> = (0..z.len()).collect();
    let mut t = 0u64;
    for _ in 0..epochs {
        order.shuffle(rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let margin = y[i] * scale * dot(&v, &z[i]);
            let shrink = 1.0 - eta * lambda;
            if shrink <= 0.0 {
                v.iter_mut().for_each(|w| *w = 0.0);
                scale = 1.0;
            } else {
                scale *= shrink;
            }
            if margin < 1.0 {
                let step = eta * y[i] / scale;
                v.iter_mut().zip(&z[i]).for_each(|(w, x)| *w += step * x);
            }
            if scale < 1e-9 {
                v.iter_mut().for_each(|w| *w *= scale);
                scale = 1.0;
            }
        }
    }
    v.iter().map(|w| w * scale).collect()
}

fn svm_predict(
    train: &[&SparseVec],
    labels: &[BookLabel],
    test: &[&SparseVec],
    lambda: f64,
    epochs: usize,
    standardize: bool,
    seed: u64,
) -> Vec<BookLabel> {
    let p = train[0].dim();
    let st = Standardizer::fit(train, p, standardize);
    let z: Vec<Vec<f64>> = train.par_iter().map(|x| st.transform(x)).collect();
    let mut classes: Vec<BookLabel> = labels.to_vec();
    classes.sort();
    classes.dedup();
    if classes.len() == 1 {
        return vec![classes[0]; test.len()];
    }
    let weights: Vec<Vec<f64>> = classes
        .par_iter()
        .map(|&c| {
            let y: Vec<f64> = labels
                .iter()
                .map(|&l| if l == c { 1.0 } else { -1.0 })
                .collect();
            let mut rng = rng_for(seed, 1 + c.index() as u64);
            pegasos(&z, &y, lambda, epochs, &mut rng)
        })
        .collect();
    test.par_iter()
        .map(|x| {
            let zx = st.transform(x);
            let mut best = (classes[0], f64::NEG_INFINITY);
            for (c, w) in classes.iter().zip(&weights) {
                let score = dot(w, &zx);
                if score > best.1 {
                    best = (*c, score);
                }
            }
            best.0
        })
        .collect()
}

/// Dense column-major copy of the training rows.
pub struct Columns {
    n: usize,
    p: usize,
    data: Vec<f64>,
}

impl Columns {
    pub fn new(rows: &[&SparseVec]) -> Self {
        let n = rows.len();
        let p = rows.first().map_or(0, |r| r.dim());
        let mut data = vec![0.0; n * p];
        for (i, r) in rows.iter().enumerate() {
            for (j, x) in r.iter() {
                data[j * n + i] = x;
            }
        }
        Columns { n, p, data }
    }

    fn get(&self, sample: usize, feature: usize) -> f64 {
        self.data[feature * self.n + sample]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    /// Features examined per split; `>= p` examines all of them in index
    /// order.
    pub max_features: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf(BookLabel),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// CART classification tree with Gini impurity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

struct BestSplit {
    score: f64,
    feature: usize,
    threshold: f64,
}

impl DecisionTree {
    /// Fits on the given sample indices (repeats allowed, as in a bootstrap).
    /// A split candidate is scored by `Σ_left c²/n_l + Σ_right c²/n_r`, which
    /// orders splits exactly as the weighted Gini impurity does; ties go to
    /// the lower feature index, then the lower threshold. When fewer than
    /// all features are examined, features are visited in a random order
    /// until `max_features` non-constant ones have been scored.
    pub fn fit(
        x: &Columns,
        y: &[BookLabel],
        samples: &[usize],
        params: &TreeParams,
        rng: &mut impl Rng,
    ) -> DecisionTree {
        let mut tree = DecisionTree { nodes: Vec::new() };
        tree.grow(x, y, samples.to_vec(), 0, params, rng);
        tree
    }

    fn grow(
        &mut self,
        x: &Columns,
        y: &[BookLabel],
        samples: Vec<usize>,
        depth: usize,
        params: &TreeParams,
        rng: &mut impl Rng,
    ) -> usize {
        let mut counts = [0usize; BookLabel::COUNT];
        for &s in &samples {
            counts[y[s].index()] += 1;
        }
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf(majority(&counts)));
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || samples.len() < 2 || params.max_depth.is_some_and(|d| depth >= d) {
            return id;
        }
        let Some(best) = best_split(x, y, &samples, params.max_features, rng) else {
            return id;
        };
        let (left, right): (Vec<usize>, Vec<usize>) = samples
            .into_iter()
            .partition(|&s| x.get(s, best.feature) <= best.threshold);
        let l = self.grow(x, y, left, depth + 1, params, rng);
        let r = self.grow(x, y, right, depth + 1, params, rng);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: l,
            right: r,
        };
        id
    }

    pub fn predict(&self, x: &SparseVec) -> BookLabel {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf(label) => return label,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x.get(feature) <= threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

fn best_split(
    x: &Columns,
    y: &[BookLabel],
    samples: &[usize],
    max_features: usize,
    rng: &mut impl Rng,
) -> Option<BestSplit> {
    let mut order: Vec<usize> = (0..x.p).collect();
    let random = max_features < x.p;
    let mut best: Option<BestSplit> = None;
    let mut scored = 0;
    let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(samples.len());
    let mut total = [0usize; BookLabel::COUNT];
    for &s in samples {
        total[y[s].index()] += 1;
    }
    for pos in 0..x.p {
        if random {
            let pick = rng.gen_range(pos..x.p);
            order.swap(pos, pick);
        }
        let f = order[pos];
        pairs.clear();
        pairs.extend(samples.iter().map(|&s| (x.get(s, f), y[s].index())));
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pairs[0].0 == pairs[pairs.len() - 1].0 {
            continue;
        }
        scored += 1;
        let n = pairs.len();
        let mut left = [0usize; BookLabel::COUNT];
        for i in 0..n - 1 {
            left[pairs[i].1] += 1;
            if pairs[i].0 == pairs[i + 1].0 {
                continue;
            }
            let (nl, nr) = ((i + 1) as f64, (n - i - 1) as f64);
            let mut sl = 0.0;
            let mut sr = 0.0;
            for c in 0..BookLabel::COUNT {
                sl += (left[c] * left[c]) as f64;
                let r = total[c] - left[c];
                sr += (r * r) as f64;
            }
            let score = sl / nl + sr / nr;
            let mut threshold = (pairs[i].0 + pairs[i + 1].0) / 2.0;
            if threshold >= pairs[i + 1].0 {
                threshold = pairs[i].0;
            }
            let better = match &best {
                None => true,
                Some(b) => {
                    score > b.score
                        || (score == b.score
                            && (f < b.feature || (f == b.feature && threshold < b.threshold)))
                }
            };
            if better {
                best = Some(BestSplit {
                    score,
                    feature: f,
                    threshold,
                });
            }
        }
        if scored == max_features {
            break;
        }
    }
    best
}

/// Bagged Gini trees; tree `t` draws from seed stream `t`.
pub struct RandomForest {
    trees: Vec<DecisionTree>,
}

impl RandomForest {
    pub fn fit(
        train: &[&SparseVec],
        labels: &[BookLabel],
        n_trees: usize,
        params: &TreeParams,
        bootstrap: bool,
        seed: u64,
    ) -> RandomForest {
        let x = Columns::new(train);
        let n = train.len();
        let trees = (0..n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = rng_for(seed, t as u64);
                let samples: Vec<usize> = if bootstrap {
                    (0..n).map(|_| rng.gen_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                DecisionTree::fit(&x, labels, &samples, params, &mut rng)
            })
            .collect();
        RandomForest { trees }
    }

    pub fn predict(&self, x: &SparseVec) -> BookLabel {
        let mut votes = [0usize; BookLabel::COUNT];
        for t in &self.trees {
            votes[t.predict(x).index()] += 1;
        }
        majority(&votes)
    }
}

pub fn train_predict(
    train: &[&SparseVec],
    labels: &[BookLabel],
    test: &[&SparseVec],
    spec: &ClassifierSpec,
    seed: u64,
) -> Result<Vec<BookLabel>> {
    spec.validate()?;
    if train.is_empty() {
        return Err(ClassifyError::EmptyTrain);
    }
    assert_eq!(train.len(), labels.len());
    match *spec {
        ClassifierSpec::Knn { k, measure } => knn_predict(train, labels, test, k, measure),
        ClassifierSpec::SvmLinear {
            lambda,
            epochs,
            standardize,
        } => Ok(svm_predict(
            train,
            labels,
            test,
            lambda,
            epochs,
            standardize,
            seed,
        )),
        ClassifierSpec::RandomForest {
            n_trees,
            max_depth,
            features,
            bootstrap,
        } => {
            let params = TreeParams {
                max_depth,
                max_features: features.resolve(train[0].dim()),
            };
            let forest = RandomForest::fit(train, labels, n_trees, &params, bootstrap, seed);
            Ok(test.par_iter().map(|x| forest.predict(x)).collect())
        }
    }
}

/// Prediction counts, `counts[predicted][actual]`, indexed by label id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<BookLabel>,
    pub counts: Vec<Vec<u64>>,
    pub accuracy: f64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn count(&self, predicted: BookLabel, actual: BookLabel) -> u64 {
        self.counts[predicted.index()][actual.index()]
    }

    /// Rows are predicted labels, columns actual, both sorted by book name.
    pub fn to_csv(&self) -> String {
        let order = BookLabel::table_order();
        let mut out = String::from("predicted\\actual");
        for l in order {
            write!(out, ",{l}").unwrap();
        }
        out.push('\n');
        for p in order {
            out.push_str(p.display_name());
            for a in order {
                write!(out, ",{}", self.count(p, a)).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Accuracy is `trace / total`, and 0 for an empty list.
pub fn confusion(predicted: &[BookLabel], actual: &[BookLabel]) -> Result<ConfusionMatrix> {
    if predicted.len() != actual.len() {
        return Err(ClassifyError::LengthMismatch(predicted.len(), actual.len()));
    }
    let mut counts = vec![vec![0u64; BookLabel::COUNT]; BookLabel::COUNT];
    for (p, a) in predicted.iter().zip(actual) {
        counts[p.index()][a.index()] += 1;
    }
    let correct: u64 = (0..BookLabel::COUNT).map(|i| counts[i][i]).sum();
    let accuracy = if predicted.is_empty() {
        0.0
    } else {
        correct as f64 / predicted.len() as f64
    };
    Ok(ConfusionMatrix {
        labels: BookLabel::ALL.to_vec(),
        counts,
        accuracy,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub train_fraction: f64,
    pub stratified: bool,
    pub seed: u64,
    pub train_size: usize,
    pub test_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierResult {
    pub classifier: String,
    pub hyperparameters: ClassifierSpec,
    pub seed: u64,
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub split: SplitSummary,
    pub results: Vec<ClassifierResult>,
}

impl BenchmarkReport {
    pub fn accuracy_of(&self, name: &str) -> Option<f64> {
        self.results
            .iter()
            .find(|r| r.classifier == name)
            .map(|r| r.accuracy)
    }
}

/// Every classifier is trained and scored on the same split.
pub fn benchmark(
    dtm: &DocTermMatrix,
    split_spec: &SplitSpec,
    specs: &[ClassifierSpec],
    seed: u64,
) -> Result<BenchmarkReport> {
    let labels = dtm.labels();
    let (train_idx, test_idx) = split(&labels, split_spec)?;
    let train: Vec<&SparseVec> = train_idx.iter().map(|&i| &dtm.rows[i]).collect();
    let train_labels: Vec<BookLabel> = train_idx.iter().map(|&i| labels[i]).collect();
    let test: Vec<&SparseVec> = test_idx.iter().map(|&i| &dtm.rows[i]).collect();
    let actual: Vec<BookLabel> = test_idx.iter().map(|&i| labels[i]).collect();
    let results = specs
        .iter()
        .map(|spec| {
            let predicted = train_predict(&train, &train_labels, &test, spec, seed)?;
            let confusion = confusion(&predicted, &actual)?;
            Ok(ClassifierResult {
                classifier: spec.name().to_string(),
                hyperparameters: *spec,
                seed,
                accuracy: confusion.accuracy,
                confusion,
            })
        })
        .collect::<Result<_>>()?;
    Ok(BenchmarkReport {
        split: SplitSummary {
            train_fraction: split_spec.train_fraction,
            stratified: split_spec.stratified,
            seed: split_spec.seed,
            train_size: train_idx.len(),
            test_size: test_idx.len(),
        },
        results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use BookLabel::*;

    fn rows(points: &[&[f64]]) -> Vec<SparseVec> {
        points.iter().map(|p| SparseVec::from_dense(p)).collect()
    }

    #[test]
    fn split_sizes() {
        let labels = vec![Wisdom; 10];
        let (train, test) = split(&labels, &SplitSpec::default()).unwrap();
        assert_eq!((train.len(), test.len()), (7, 3));
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn stratified_split_keeps_proportions() {
        let mut labels = vec![Upanishad; 90];
        labels.extend(vec![Proverb; 10]);
        for seed in 0..5 {
            let spec = SplitSpec {
                seed,
                ..SplitSpec::default()
            };
            let (train, _) = split(&labels, &spec).unwrap();
            let proverbs = train.iter().filter(|&&i| labels[i] == Proverb).count();
            assert!((6..=8).contains(&proverbs));
            assert_eq!(train.len(), 63 + 7);
        }
    }

    #[test]
    fn split_is_deterministic() {
        let labels: Vec<BookLabel> = (0..40).map(|i| BookLabel::ALL[i % 4]).collect();
        let spec = SplitSpec {
            seed: 17,
            ..SplitSpec::default()
        };
        assert_eq!(
            split(&labels, &spec).unwrap(),
            split(&labels, &spec).unwrap()
        );
        let other = SplitSpec { seed: 18, ..spec };
        assert_ne!(
            split(&labels, &spec).unwrap(),
            split(&labels, &other).unwrap()
        );
    }

    #[test]
    fn split_errors() {
        let labels = [Wisdom, Wisdom, Proverb];
        assert_eq!(
            split(&labels, &SplitSpec::default()),
            Err(ClassifyError::TooFewChapters(Proverb))
        );
        let loose = SplitSpec {
            stratified: false,
            ..SplitSpec::default()
        };
        assert!(split(&labels, &loose).is_ok());
        assert_eq!(
            split(
                &labels,
                &SplitSpec {
                    train_fraction: 1.0,
                    ..loose
                }
            ),
            Err(ClassifyError::BadFraction(1.0))
        );
    }

    #[test]
    fn knn_memorizes() {
        let train = rows(&[&[0.0, 1.0], &[5.0, 5.0], &[9.0, 0.0]]);
        let labels = [Buddhism, Wisdom, Proverb];
        let refs: Vec<&SparseVec> = train.iter().collect();
        let pred = train_predict(
            &refs,
            &labels,
            &refs,
            &ClassifierSpec::Knn {
                k: 1,
                measure: Measure::Euclidean,
            },
            0,
        )
        .unwrap();
        assert_eq!(pred, labels);
    }

    #[test]
    fn knn_vote_tie_goes_to_smallest_label() {
        let train = rows(&[&[1.0], &[2.0]]);
        let refs: Vec<&SparseVec> = train.iter().collect();
        let probe = SparseVec::from_dense(&[1.5]);
        let pred = train_predict(
            &refs,
            &[Wisdom, TaoTeChing],
            &[&probe],
            &ClassifierSpec::Knn {
                k: 2,
                measure: Measure::Manhattan,
            },
            0,
        )
        .unwrap();
        assert_eq!(pred, [TaoTeChing]);
    }

    #[test]
    fn forest_on_constant_features_predicts_majority() {
        let train = rows(&[&[1.0, 2.0], &[1.0, 2.0], &[1.0, 2.0], &[1.0, 2.0]]);
        let refs: Vec<&SparseVec> = train.iter().collect();
        let labels = [Wisdom, Proverb, Wisdom, Wisdom];
        let pred = train_predict(
            &refs,
            &labels,
            &refs[..1],
            &ClassifierSpec::random_forest(),
            3,
        )
        .unwrap();
        assert_eq!(pred, [Wisdom]);
    }

    #[test]
    fn tree_fits_training_data() {
        let train = rows(&[&[0.0, 0.0], &[0.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]]);
        let refs: Vec<&SparseVec> = train.iter().collect();
        let labels = [Buddhism, Wisdom, Wisdom, Buddhism];
        let x = Columns::new(&refs);
        let tree = DecisionTree::fit(
            &x,
            &labels,
            &[0, 1, 2, 3],
            &TreeParams {
                max_depth: None,
                max_features: 2,
            },
            &mut rng_for(0, 0),
        );
        for (r, l) in train.iter().zip(labels) {
            assert_eq!(tree.predict(r), l);
        }
        let stump = DecisionTree::fit(
            &x,
            &labels,
            &[0, 1, 2, 3],
            &TreeParams {
                max_depth: Some(1),
                max_features: 2,
            },
            &mut rng_for(0, 0),
        );
        assert!(stump.node_count() <= 3);
    }

    #[test]
    fn svm_separates_separable_training_data() {
        let train = rows(&[
            &[0.0, 1.0],
            &[1.0, 0.5],
            &[0.5, 0.0],
            &[4.0, 5.0],
            &[5.0, 4.5],
            &[4.5, 6.0],
        ]);
        let refs: Vec<&SparseVec> = train.iter().collect();
        let labels = [Proverb, Proverb, Proverb, Wisdom, Wisdom, Wisdom];
        let pred = train_predict(&refs, &labels, &refs, &ClassifierSpec::svm_linear(), 4).unwrap();
        assert_eq!(pred, labels);
    }

    #[test]
    fn single_class_svm_predicts_it() {
        let train = rows(&[&[1.0], &[2.0]]);
        let refs: Vec<&SparseVec> = train.iter().collect();
        let pred = train_predict(
            &refs,
            &[Wisdom, Wisdom],
            &refs,
            &ClassifierSpec::svm_linear(),
            0,
        )
        .unwrap();
        assert_eq!(pred, [Wisdom, Wisdom]);
    }

    #[test]
    fn train_errors() {
        let probe = SparseVec::from_dense(&[1.0]);
        assert_eq!(
            train_predict(&[], &[], &[&probe], &ClassifierSpec::knn(), 0),
            Err(ClassifyError::EmptyTrain)
        );
        assert!(matches!(
            train_predict(
                &[&probe],
                &[Wisdom],
                &[&probe],
                &ClassifierSpec::Knn {
                    k: 0,
                    measure: Measure::Cosine
                },
                0
            ),
            Err(ClassifyError::InvalidHyperparameter(_))
        ));
    }

    #[test]
    fn confusion_arithmetic() {
        let actual = [Wisdom, Wisdom, Proverb, Buddhism];
        let cm = confusion(&actual, &actual).unwrap();
        assert_eq!(cm.accuracy, 1.0);
        assert_eq!(cm.trace(), 4);
        assert_eq!(cm.count(Wisdom, Wisdom), 2);

        let cm = confusion(&[Wisdom, Proverb, Proverb, Buddhism], &actual).unwrap();
        assert_eq!(cm.count(Proverb, Wisdom), 1);
        assert_eq!(cm.accuracy, 0.75);
        assert_eq!(cm.total(), 4);
        assert_eq!(
            confusion(&[Wisdom], &[]),
            Err(ClassifyError::LengthMismatch(1, 0))
        );
    }

    #[test]
    fn confusion_csv_uses_table_layout() {
        let cm = confusion(&[YogaSutra], &[Upanishad]).unwrap();
        let csv = cm.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "predicted\\actual,Buddhism,Ecclesiastes,Ecclesiasticus,Proverb,TaoTeChing,Upanishad,Wisdom,YogaSutra"
        );
        assert_eq!(lines[8], "YogaSutra,0,0,0,0,0,1,0,0");
    }

    #[test]
    fn feature_rule() {
        assert_eq!(FeatureRule::Sqrt.resolve(8266), 91);
        assert_eq!(FeatureRule::Sqrt.resolve(9), 3);
        assert_eq!(FeatureRule::All.resolve(5), 5);
        assert_eq!(FeatureRule::Count(10).resolve(5), 5);
    }

    #[test]
    fn spec_serde_is_tagged() {
        let json = serde_json::to_string(&ClassifierSpec::knn()).unwrap();
        assert_eq!(json, r#"{"kind":"knn","k":5,"measure":"euclidean"}"#);
        let back: ClassifierSpec =
            serde_json::from_str(r#"{"kind":"random-forest","n_trees":3,"max_depth":null,"features":"sqrt","bootstrap":false}"#)
                .unwrap();
        assert!(matches!(
            back,
            ClassifierSpec::RandomForest { n_trees: 3, .. }
        ));
    }
}
