//! k-means over chapter rows, book co-membership graphs and average-linkage
//! dendrograms over books.

use std::cmp::Ordering;
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dtm::RowLabel;
use crate::label::BookLabel;
use crate::rng::{derive_seed, rng_for};
use crate::similarity::{BookDistanceMatrix, Measure};
use crate::sparse::SparseVec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClusterError {
    #[error("no rows to cluster")]
    EmptyInput,
    #[error("k = {k} is outside 1..={n}")]
    KTooLarge { k: usize, n: usize },
    #[error("k-means needs a measure with a centroid; {0} has none")]
    UnsupportedMeasure(Measure),
    #[error("distance matrix has a missing or non-finite off-diagonal entry")]
    NonFiniteInput,
    #[error("need at least two books")]
    TooFewBooks,
}

pub type Result<T, E = ClusterError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansParams {
    pub k: usize,
    pub measure: Measure,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
}

impl KMeansParams {
    pub fn new(k: usize, measure: Measure, seed: u64) -> Self {
        KMeansParams {
            k,
            measure,
            seed,
            max_iter: 100,
            tol: 1e-9,
        }
    }
}

/// Result of one k-means fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub k: usize,
    pub measure: Measure,
    /// Cluster id per row.
    pub assign: Vec<usize>,
    pub centroids: Vec<SparseVec>,
    /// Minimized objective: summed squared distance for euclidean, summed
    /// L1 distance for manhattan.
    pub objective: f64,
    /// Summed plain (unsquared) distance to the assigned centroid.
    pub plain_objective: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Index of the restart that produced this fit.
    pub restart: usize,
    /// Objective after every centroid update.
    pub history: Vec<f64>,
}

impl Partition {
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &c in &self.assign {
            sizes[c] += 1;
        }
        sizes
    }
}

/// Cost of a row against a dense centroid in the objective's units.
fn exact_cost(measure: Measure, x: &SparseVec, c: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut it = x.iter().peekable();
    for (j, &cj) in c.iter().enumerate() {
        let xj = match it.peek() {
            Some(&(idx, v)) if idx == j => {
                it.next();
                v
            }
            _ => 0.0,
        };
        sum += match measure {
            Measure::Manhattan => (xj - cj).abs(),
            _ => (xj - cj) * (xj - cj),
        };
    }
    sum
}

/// Centroid with its norm cached, for O(nnz) distance evaluation.
struct Center {
    dense: Vec<f64>,
    norm: f64,
}

impl Center {
    fn new(measure: Measure, dense: Vec<f64>) -> Self {
        let norm = match measure {
            Measure::Manhattan => dense.iter().map(|c| c.abs()).sum(),
            _ => dense.iter().map(|c| c * c).sum(),
        };
        Center { dense, norm }
    }

    fn cost(&self, measure: Measure, x: &SparseVec) -> f64 {
        let mut total = self.norm;
        for (j, xj) in x.iter() {
            let cj = self.dense[j];
            total += match measure {
                Measure::Manhattan => (xj - cj).abs() - cj.abs(),
                _ => xj * xj - 2.0 * xj * cj,
            };
        }
        total.max(0.0)
    }
}

fn check(rows: &[SparseVec], k: usize, measure: Measure) -> Result<()> {
    if rows.is_empty() {
        return Err(ClusterError::EmptyInput);
    }
    if k == 0 || k > rows.len() {
        return Err(ClusterError::KTooLarge { k, n: rows.len() });
    }
    match measure {
        Measure::Euclidean | Measure::Manhattan => Ok(()),
        other => Err(ClusterError::UnsupportedMeasure(other)),
    }
}

/// k-means++ seeding: first center uniform, then proportional to the cost
/// against the nearest chosen center.
fn init_centers(rows: &[SparseVec], k: usize, measure: Measure, rng: &mut impl Rng) -> Vec<Center> {
    let mut chosen = vec![rng.gen_range(0..rows.len())];
    let mut best: Vec<f64> = {
        let c = Center::new(measure, rows[chosen[0]].to_dense());
        rows.iter().map(|x| c.cost(measure, x)).collect()
    };
    while chosen.len() < k {
        let total: f64 = best.iter().sum();
        let next = if total > 0.0 {
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in best.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            pick.unwrap_or_else(|| best.iter().rposition(|&w| w > 0.0).unwrap())
        } else {
            (0..rows.len()).find(|i| !chosen.contains(i)).unwrap()
        };
        chosen.push(next);
        let c = Center::new(measure, rows[next].to_dense());
        for (b, x) in best.iter_mut().zip(rows) {
            *b = b.min(c.cost(measure, x));
        }
    }
    chosen
        .into_iter()
        .map(|i| Center::new(measure, rows[i].to_dense()))
        .collect()
}

/// Nearest center per row (ties to the lowest id), then empty clusters are
/// filled with the row farthest from its center among clusters of size > 1.
fn assign_rows(rows: &[SparseVec], centers: &mut [Center], measure: Measure) -> Vec<usize> {
    let scored: Vec<(usize, f64)> = rows
        .par_iter()
        .map(|x| {
            let mut best = (0, f64::INFINITY);
            for (c, center) in centers.iter().enumerate() {
                let d = center.cost(measure, x);
                if d < best.1 {
                    best = (c, d);
                }
            }
            best
        })
        .collect();
    let mut assign: Vec<usize> = scored.iter().map(|s| s.0).collect();
    let mut cost: Vec<f64> = scored.iter().map(|s| s.1).collect();
    let k = centers.len();
    loop {
        let mut sizes = vec![0usize; k];
        for &c in &assign {
            sizes[c] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            break;
        };
        let donor = (0..rows.len())
            .filter(|&i| sizes[assign[i]] > 1)
            .max_by(|&a, &b| cost[a].total_cmp(&cost[b]).then(b.cmp(&a)))
            .expect("k <= n guarantees a donor");
        assign[donor] = empty;
        cost[donor] = 0.0;
        centers[empty] = Center::new(measure, rows[donor].to_dense());
    }
    assign
}

fn update_centers(rows: &[SparseVec], assign: &[usize], k: usize, measure: Measure) -> Vec<Center> {
    let p = rows[0].dim();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &c) in assign.iter().enumerate() {
        members[c].push(i);
    }
    members
        .par_iter()
        .map(|idx| {
            let mut dense = vec![0.0; p];
            match measure {
                Measure::Manhattan => {
                    let mut column: Vec<Vec<f64>> = vec![Vec::new(); p];
                    for &i in idx {
                        for (j, x) in rows[i].iter() {
                            column[j].push(x);
                        }
                    }
                    for (j, mut values) in column.into_iter().enumerate() {
                        values.resize(idx.len(), 0.0);
                        values.sort_by(f64::total_cmp);
                        let mid = values.len() / 2;
                        dense[j] = if values.len() % 2 == 1 {
                            values[mid]
                        } else {
                            (values[mid - 1] + values[mid]) / 2.0
                        };
                    }
                }
                _ => {
                    for &i in idx {
                        for (j, x) in rows[i].iter() {
                            dense[j] += x;
                        }
                    }
                    let m = idx.len() as f64;
                    dense.iter_mut().for_each(|v| *v /= m);
                }
            }
            Center::new(measure, dense)
        })
        .collect()
}

fn objective(
    rows: &[SparseVec],
    assign: &[usize],
    centers: &[Center],
    measure: Measure,
) -> (f64, f64) {
    let costs: Vec<f64> = rows
        .par_iter()
        .zip(assign)
        .map(|(x, &c)| exact_cost(measure, x, &centers[c].dense))
        .collect();
    let total = costs.iter().sum();
    let plain = match measure {
        Measure::Manhattan => total,
        _ => costs.iter().map(|c| c.sqrt()).sum(),
    };
    (total, plain)
}

fn lloyd(rows: &[SparseVec], params: &KMeansParams, restart: usize) -> Partition {
    let measure = params.measure;
    let mut rng = rng_for(params.seed, restart as u64);
    let mut centers = init_centers(rows, params.k, measure, &mut rng);
    let mut assign = assign_rows(rows, &mut centers, measure);
    let mut history: Vec<f64> = Vec::new();
    let mut plain = 0.0;
    let mut iterations = 0;
    while iterations < params.max_iter.max(1) {
        iterations += 1;
        centers = update_centers(rows, &assign, params.k, measure);
        let (obj, obj_plain) = objective(rows, &assign, &centers, measure);
        plain = obj_plain;
        let improvement = history.last().map(|prev| prev - obj);
        history.push(obj);
        if improvement.is_some_and(|d| d < params.tol) {
            break;
        }
        let next = assign_rows(rows, &mut centers, measure);
        if next == assign {
            break;
        }
        assign = next;
    }
    Partition {
        k: params.k,
        measure,
        assign,
        centroids: centers
            .iter()
            .map(|c| SparseVec::from_dense(&c.dense))
            .collect(),
        objective: *history.last().unwrap(),
        plain_objective: plain,
        iterations,
        seed: params.seed,
        restart,
        history,
    }
}

/// One seeded k-means++ / Lloyd fit.
pub fn kmeans(rows: &[SparseVec], params: &KMeansParams) -> Result<Partition> {
    check(rows, params.k, params.measure)?;
    Ok(lloyd(rows, params, 0))
}

/// Best of `restarts` independent fits (lowest objective, ties to the first
/// restart). Restart `r` draws from stream `r` of `params.seed`.
pub fn kmeans_restarts(
    rows: &[SparseVec],
    params: &KMeansParams,
    restarts: usize,
) -> Result<Partition> {
    check(rows, params.k, params.measure)?;
    let fits: Vec<Partition> = (0..restarts.max(1))
        .into_par_iter()
        .map(|r| lloyd(rows, params, r))
        .collect();
    Ok(fits
        .into_iter()
        .reduce(|best, p| {
            if p.objective < best.objective {
                p
            } else {
                best
            }
        })
        .unwrap())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: BookLabel,
    pub b: BookLabel,
    pub weight: f64,
}

/// Books as nodes; edge weight is the fraction of cross-book chapter pairs
/// that share a cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterGraph {
    pub k: usize,
    pub nodes: Vec<BookLabel>,
    /// All book pairs `a < b`, zero weights included.
    pub edges: Vec<Edge>,
}

pub fn book_graph(partition: &Partition, labels: &[RowLabel]) -> ClusterGraph {
    assert_eq!(
        partition.assign.len(),
        labels.len(),
        "partition must cover every row"
    );
    let mut nodes: Vec<BookLabel> = labels.iter().map(|l| l.book).collect();
    nodes.sort();
    nodes.dedup();
    let mut counts = vec![vec![0u64; partition.k]; nodes.len()];
    for (l, &c) in labels.iter().zip(&partition.assign) {
        let b = nodes.binary_search(&l.book).unwrap();
        counts[b][c] += 1;
    }
    let sizes: Vec<u64> = counts.iter().map(|row| row.iter().sum()).collect();
    let mut edges = Vec::new();
    for a in 0..nodes.len() {
        for b in a + 1..nodes.len() {
            let shared: u64 = counts[a].iter().zip(&counts[b]).map(|(x, y)| x * y).sum();
            edges.push(Edge {
                a: nodes[a],
                b: nodes[b],
                weight: shared as f64 / (sizes[a] * sizes[b]) as f64,
            });
        }
    }
    ClusterGraph {
        k: partition.k,
        nodes,
        edges,
    }
}

impl ClusterGraph {
    pub fn weight(&self, a: BookLabel, b: BookLabel) -> Option<f64> {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.edges
            .iter()
            .find(|e| e.a == a && e.b == b)
            .map(|e| e.weight)
    }

    /// Heaviest edge; ties go to the first in `edges` order.
    pub fn strongest_edge(&self) -> Option<Edge> {
        self.edges
            .iter()
            .copied()
            .filter(|e| e.weight > 0.0)
            .reduce(|best, e| if e.weight > best.weight { e } else { best })
    }

    /// Graphviz export. Zero-weight edges are omitted; `penwidth` is five
    /// times the weight.
    pub fn to_dot(&self) -> String {
        let mut out = format!("graph k{} {{\n  node [shape=circle];\n", self.k);
        for n in &self.nodes {
            writeln!(
                out,
                "  {} [label=\"{}\"];",
                n.abbreviation(),
                n.abbreviation()
            )
            .unwrap();
        }
        for e in self.edges.iter().filter(|e| e.weight > 0.0) {
            writeln!(
                out,
                "  {} -- {} [weight={}, penwidth={}];",
                e.a.abbreviation(),
                e.b.abbreviation(),
                e.weight,
                5.0 * e.weight
            )
            .unwrap();
        }
        out.push_str("}\n");
        out
    }

    /// Dendrogram over `1 - weight`.
    pub fn dendrogram(&self) -> Result<Dendrogram> {
        let m = self.nodes.len();
        let mut d = vec![0.0; m * m];
        for e in &self.edges {
            let a = self.nodes.binary_search(&e.a).unwrap();
            let b = self.nodes.binary_search(&e.b).unwrap();
            d[a * m + b] = 1.0 - e.weight;
            d[b * m + a] = 1.0 - e.weight;
        }
        Dendrogram::average_linkage(&self.nodes, &d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub k: usize,
    pub partition: Partition,
    pub graph: ClusterGraph,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    pub measure: Measure,
    pub k_min: usize,
    pub k_max: usize,
    pub seed: u64,
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for SweepParams {
    fn default() -> Self {
        SweepParams {
            measure: Measure::Euclidean,
            k_min: 2,
            k_max: 7,
            seed: 0,
            restarts: 10,
            max_iter: 100,
            tol: 1e-9,
        }
    }
}

/// One best-of-restarts fit per `k` in `k_min..=k_max`; `k` uses seed
/// stream `k` of `params.seed`.
pub fn sweep_k(
    rows: &[SparseVec],
    labels: &[RowLabel],
    params: &SweepParams,
) -> Result<Vec<SweepResult>> {
    (params.k_min..=params.k_max)
        .map(|k| {
            let fit = KMeansParams {
                k,
                measure: params.measure,
                seed: derive_seed(params.seed, k as u64),
                max_iter: params.max_iter,
                tol: params.tol,
            };
            let partition = kmeans_restarts(rows, &fit, params.restarts)?;
            let graph = book_graph(&partition, labels);
            Ok(SweepResult {
                k,
                partition,
                graph,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    /// Cluster ids: leaves are `0..n`, merge `t` creates id `n + t`.
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub leaves: Vec<BookLabel>,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    /// Average-linkage agglomeration over a row-major `n × n` distance
    /// matrix. Equal heights are broken by the lexicographic order of the
    /// two clusters' sorted leaf lists.
    pub fn average_linkage(leaves: &[BookLabel], d: &[f64]) -> Result<Dendrogram> {
        let n = leaves.len();
        if n < 2 {
            return Err(ClusterError::TooFewBooks);
        }
        assert_eq!(d.len(), n * n);
        for a in 0..n {
            for b in 0..n {
                if a != b && !d[a * n + b].is_finite() {
                    return Err(ClusterError::NonFiniteInput);
                }
            }
        }
        let mut active: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
        let mut merges = Vec::with_capacity(n - 1);
        while active.len() > 1 {
            let mut best: Option<(f64, usize, usize)> = None;
            for x in 0..active.len() {
                for y in x + 1..active.len() {
                    let (a, b) = (&active[x].1, &active[y].1);
                    let mut sum = 0.0;
                    for &i in a {
                        for &j in b {
                            sum += d[i * n + j];
                        }
                    }
                    let h = sum / (a.len() * b.len()) as f64;
                    let better = match best {
                        None => true,
                        Some((bh, bx, by)) => match h.total_cmp(&bh) {
                            Ordering::Less => true,
                            Ordering::Greater => false,
                            Ordering::Equal => {
                                pair_key(a, b) < pair_key(&active[bx].1, &active[by].1)
                            }
                        },
                    };
                    if better {
                        best = Some((h, x, y));
                    }
                }
            }
            let (height, x, y) = best.unwrap();
            let (first, second) = if active[x].1 <= active[y].1 {
                (x, y)
            } else {
                (y, x)
            };
            let mut members = active[first].1.clone();
            members.extend(&active[second].1);
            members.sort();
            merges.push(Merge {
                left: active[first].0,
                right: active[second].0,
                height,
                size: members.len(),
            });
            let id = n + merges.len() - 1;
            let (lo, hi) = (x.min(y), x.max(y));
            active.remove(hi);
            active[lo] = (id, members);
        }
        Ok(Dendrogram {
            leaves: leaves.to_vec(),
            merges,
        })
    }

    fn height_of(&self, id: usize) -> f64 {
        if id < self.leaves.len() {
            0.0
        } else {
            self.merges[id - self.leaves.len()].height
        }
    }

    fn newick_node(&self, id: usize, out: &mut String) {
        let n = self.leaves.len();
        if id < n {
            out.push_str(self.leaves[id].abbreviation());
            return;
        }
        let m = self.merges[id - n];
        out.push('(');
        for (k, child) in [m.left, m.right].into_iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            self.newick_node(child, out);
            write!(out, ":{}", m.height - self.height_of(child)).unwrap();
        }
        out.push(')');
    }

    /// Newick string; branch length is parent height minus child height.
    pub fn to_newick(&self) -> String {
        let mut out = String::new();
        let root = self.leaves.len() + self.merges.len() - 1;
        self.newick_node(root, &mut out);
        out.push(';');
        out
    }
}

fn pair_key<'a>(a: &'a [usize], b: &'a [usize]) -> (&'a [usize], &'a [usize]) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Average-linkage tree over the off-diagonal entries of a book matrix.
pub fn book_dendrogram(delta: &BookDistanceMatrix) -> Result<Dendrogram> {
    let m = delta.len();
    let mut d = vec![0.0; m * m];
    for a in 0..m {
        for b in 0..m {
            if a != b {
                d[a * m + b] = delta.cell(a, b).ok_or(ClusterError::NonFiniteInput)?;
            }
        }
    }
    Dendrogram::average_linkage(&delta.books, &d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::similarity::Aggregator;

    fn rows_1d(xs: &[f64]) -> Vec<SparseVec> {
        xs.iter().map(|&x| SparseVec::from_dense(&[x])).collect()
    }

    fn labels(books: &[BookLabel]) -> Vec<RowLabel> {
        books
            .iter()
            .enumerate()
            .map(|(i, &book)| RowLabel { book, chapter: i })
            .collect()
    }

    fn assert_monotone(p: &Partition) {
        for w in p.history.windows(2) {
            assert!(
                w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0),
                "objective rose: {:?}",
                p.history
            );
        }
    }

    #[test]
    fn one_dimensional_two_clusters() {
        let rows = rows_1d(&[0.0, 1.0, 10.0, 11.0]);
        let p = kmeans_restarts(&rows, &KMeansParams::new(2, Measure::Euclidean, 1), 10).unwrap();
        assert_eq!(p.assign[0], p.assign[1]);
        assert_eq!(p.assign[2], p.assign[3]);
        assert_ne!(p.assign[0], p.assign[2]);
        let mut cents: Vec<f64> = p.centroids.iter().map(|c| c.get(0)).collect();
        cents.sort_by(f64::total_cmp);
        assert_eq!(cents, [0.5, 10.5]);
        assert_eq!(p.objective, 1.0);
        assert_eq!(p.plain_objective, 2.0);
        assert_monotone(&p);
    }

    #[test]
    fn k_one_is_the_mean() {
        let rows = rows_1d(&[1.0, 2.0, 6.0]);
        let p = kmeans(&rows, &KMeansParams::new(1, Measure::Euclidean, 3)).unwrap();
        assert_eq!(p.centroids[0].get(0), 3.0);
        assert_eq!(p.objective, 4.0 + 1.0 + 9.0);
    }

    #[test]
    fn k_equals_n_has_zero_objective() {
        let rows = rows_1d(&[1.0, 2.0, 6.0, 9.5]);
        for m in [Measure::Euclidean, Measure::Manhattan] {
            let p = kmeans(&rows, &KMeansParams::new(4, m, 9)).unwrap();
            assert_eq!(p.objective, 0.0);
            assert_eq!(p.cluster_sizes(), [1, 1, 1, 1]);
        }
    }

    #[test]
    fn manhattan_uses_median() {
        let rows = rows_1d(&[0.0, 1.0, 5.0]);
        let p = kmeans(&rows, &KMeansParams::new(1, Measure::Manhattan, 0)).unwrap();
        assert_eq!(p.centroids[0].get(0), 1.0);
        assert_eq!(p.objective, 1.0 + 0.0 + 4.0);
    }

    #[test]
    fn duplicates_keep_every_cluster_nonempty() {
        let rows = rows_1d(&[2.0, 2.0, 2.0]);
        let p = kmeans(&rows, &KMeansParams::new(3, Measure::Euclidean, 0)).unwrap();
        assert_eq!(p.cluster_sizes(), [1, 1, 1]);
        assert_eq!(p.objective, 0.0);
    }

    #[test]
    fn errors() {
        let rows = rows_1d(&[1.0, 2.0]);
        assert_eq!(
            kmeans(&rows, &KMeansParams::new(3, Measure::Euclidean, 0)).unwrap_err(),
            ClusterError::KTooLarge { k: 3, n: 2 }
        );
        assert_eq!(
            kmeans(&[], &KMeansParams::new(1, Measure::Euclidean, 0)).unwrap_err(),
            ClusterError::EmptyInput
        );
        assert_eq!(
            kmeans(&rows, &KMeansParams::new(1, Measure::Cosine, 0)).unwrap_err(),
            ClusterError::UnsupportedMeasure(Measure::Cosine)
        );
    }

    #[test]
    fn objective_matches_recomputation() {
        let rows: Vec<SparseVec> = (0..12)
            .map(|i| {
                let i = i as f64;
                SparseVec::from_dense(&[i % 3.0, (i * 7.0) % 5.0, 0.0, i / 4.0])
            })
            .collect();
        for m in [Measure::Euclidean, Measure::Manhattan] {
            let p = kmeans_restarts(&rows, &KMeansParams::new(3, m, 5), 4).unwrap();
            let recomputed: f64 = rows
                .iter()
                .zip(&p.assign)
                .map(|(x, &c)| exact_cost(m, x, &p.centroids[c].to_dense()))
                .sum();
            assert_eq!(recomputed, p.objective);
            assert_monotone(&p);
        }
    }

    #[test]
    fn graph_weights() {
        let (a, b) = (BookLabel::Buddhism, BookLabel::TaoTeChing);
        let lab = labels(&[a, a, b]);
        let part = |assign: Vec<usize>, k| Partition {
            k,
            measure: Measure::Euclidean,
            assign,
            centroids: vec![],
            objective: 0.0,
            plain_objective: 0.0,
            iterations: 0,
            seed: 0,
            restart: 0,
            history: vec![],
        };
        // c1, c3 together; c2 apart
        let g = book_graph(&part(vec![0, 1, 0], 2), &lab);
        assert_eq!(g.weight(a, b), Some(0.5));
        let g = book_graph(&part(vec![0, 0, 0], 1), &lab);
        assert_eq!(g.weight(b, a), Some(1.0));
        let g = book_graph(&part(vec![0, 0, 1], 2), &lab);
        assert_eq!(g.weight(a, b), Some(0.0));
        assert_eq!(g.strongest_edge(), None);
        assert!(!g.to_dot().contains("--"));
    }

    #[test]
    fn dot_export() {
        let g = ClusterGraph {
            k: 7,
            nodes: vec![BookLabel::TaoTeChing, BookLabel::Upanishad],
            edges: vec![Edge {
                a: BookLabel::TaoTeChing,
                b: BookLabel::Upanishad,
                weight: 0.5,
            }],
        };
        let dot = g.to_dot();
        assert!(dot.starts_with("graph k7 {"));
        assert!(dot.contains("Tao -- Upd [weight=0.5, penwidth=2.5];"));
    }

    #[test]
    fn sweep_is_reproducible_and_bounded() {
        let rows: Vec<SparseVec> = (0..9)
            .map(|i| SparseVec::from_dense(&[(i * i % 7) as f64, (i % 4) as f64]))
            .collect();
        let books = [
            BookLabel::Buddhism,
            BookLabel::TaoTeChing,
            BookLabel::Upanishad,
        ];
        let lab = labels(&(0..9).map(|i| books[i % 3]).collect::<Vec<_>>());
        let params = SweepParams {
            seed: 11,
            ..SweepParams::default()
        };
        let a = sweep_k(&rows, &lab, &params).unwrap();
        assert_eq!(
            a.iter().map(|r| r.k).collect::<Vec<_>>(),
            [2, 3, 4, 5, 6, 7]
        );
        assert_eq!(a, sweep_k(&rows, &lab, &params).unwrap());

        let small = &rows[..5];
        assert_eq!(
            sweep_k(small, &lab[..5], &params).unwrap_err(),
            ClusterError::KTooLarge { k: 6, n: 5 }
        );
    }

    fn delta3(d_ab: f64, d_ac: f64, d_bc: f64) -> BookDistanceMatrix {
        BookDistanceMatrix::from_cells(
            vec![
                BookLabel::Buddhism,
                BookLabel::TaoTeChing,
                BookLabel::Upanishad,
            ],
            Measure::Euclidean,
            Aggregator::Median,
            vec![
                None,
                Some(d_ab),
                Some(d_ac),
                Some(d_ab),
                None,
                Some(d_bc),
                Some(d_ac),
                Some(d_bc),
                None,
            ],
        )
    }

    #[test]
    fn dendrogram_hand_trace() {
        let t = book_dendrogram(&delta3(1.0, 10.0, 10.0)).unwrap();
        assert_eq!(
            t.merges,
            [
                Merge {
                    left: 0,
                    right: 1,
                    height: 1.0,
                    size: 2
                },
                Merge {
                    left: 3,
                    right: 2,
                    height: 10.0,
                    size: 3
                },
            ]
        );
        assert_eq!(t.to_newick(), "((Bdd:1,Tao:1):9,Upd:10);");
    }

    #[test]
    fn dendrogram_zero_pair_and_ties() {
        let t = book_dendrogram(&delta3(5.0, 5.0, 0.0)).unwrap();
        assert_eq!(
            (t.merges[0].left, t.merges[0].right, t.merges[0].height),
            (1, 2, 0.0)
        );
        let t = book_dendrogram(&delta3(2.0, 2.0, 2.0)).unwrap();
        assert_eq!((t.merges[0].left, t.merges[0].right), (0, 1));
    }

    #[test]
    fn dendrogram_rejects_missing() {
        let mut d = delta3(1.0, 2.0, 3.0);
        d = BookDistanceMatrix::from_cells(
            d.books.clone(),
            d.measure,
            d.aggregator,
            vec![
                None,
                None,
                Some(2.0),
                None,
                None,
                Some(3.0),
                Some(2.0),
                Some(3.0),
                None,
            ],
        );
        assert_eq!(
            book_dendrogram(&d).unwrap_err(),
            ClusterError::NonFiniteInput
        );
    }

    #[test]
    fn dendrogram_of_eight_books_has_seven_monotone_merges() {
        let books = BookLabel::ALL.to_vec();
        let mut d = vec![0.0; 64];
        for a in 0..8 {
            for b in 0..8 {
                if a != b {
                    d[a * 8 + b] = ((a * 3 + b * 3) % 11) as f64 + (a as f64 - b as f64).abs();
                }
            }
        }
        let t = Dendrogram::average_linkage(&books, &d).unwrap();
        assert_eq!(t.merges.len(), 7);
        assert_eq!(t.merges.last().unwrap().size, 8);
        for w in t.merges.windows(2) {
            assert!(w[1].height >= w[0].height);
        }
    }
}
