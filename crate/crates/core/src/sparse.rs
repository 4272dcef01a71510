use serde::{Deserialize, Serialize};

/// Sparse vector stored as `(index, value)` pairs sorted by index. Only
/// nonzero entries are kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVec {
    dim: usize,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseVec {
    pub fn zeros(dim: usize) -> Self {
        SparseVec {
            dim,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn from_dense(values: &[f64]) -> Self {
        let mut v = SparseVec::zeros(values.len());
        for (j, &x) in values.iter().enumerate() {
            if x != 0.0 {
                v.indices.push(j as u32);
                v.values.push(x);
            }
        }
        v
    }

    /// Builds from unordered pairs. Duplicate indices are summed and zeros
    /// dropped.
    ///
    /// Panics if an index is out of range.
    pub fn from_pairs(dim: usize, mut pairs: Vec<(u32, f64)>) -> Self {
        pairs.sort_by_key(|&(j, _)| j);
        let mut v = SparseVec::zeros(dim);
        for (j, x) in pairs {
            assert!(
                (j as usize) < dim,
                "index {j} out of range for dimension {dim}"
            );
            match v.indices.last() {
                Some(&last) if last == j => *v.values.last_mut().unwrap() += x,
                _ => {
                    v.indices.push(j);
                    v.values.push(x);
                }
            }
        }
        v.prune();
        v
    }

    fn prune(&mut self) {
        if self.values.iter().all(|&x| x != 0.0) {
            return;
        }
        let (indices, values) = self
            .indices
            .iter()
            .zip(&self.values)
            .filter(|(_, &x)| x != 0.0)
            .map(|(&j, &x)| (j, x))
            .unzip();
        self.indices = indices;
        self.values = values;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_zero(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&j, &x)| (j as usize, x))
    }

    pub fn get(&self, j: usize) -> f64 {
        match self.indices.binary_search(&(j as u32)) {
            Ok(pos) => self.values[pos],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (j, x) in self.iter() {
            out[j] = x;
        }
        out
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn scaled(&self, c: f64) -> SparseVec {
        let mut v = SparseVec {
            dim: self.dim,
            indices: self.indices.clone(),
            values: self.values.iter().map(|x| x * c).collect(),
        };
        v.prune();
        v
    }

    /// Visits the union of both supports in ascending index order, passing
    /// `(self_j, other_j)` with zeros filled in.
    pub fn merge_with(&self, other: &SparseVec, mut f: impl FnMut(f64, f64)) {
        let (ai, av) = (&self.indices, &self.values);
        let (bi, bv) = (&other.indices, &other.values);
        let (mut p, mut q) = (0, 0);
        while p < ai.len() && q < bi.len() {
            match ai[p].cmp(&bi[q]) {
                std::cmp::Ordering::Less => {
                    f(av[p], 0.0);
                    p += 1;
                }
                std::cmp::Ordering::Greater => {
                    f(0.0, bv[q]);
                    q += 1;
                }
                std::cmp::Ordering::Equal => {
                    f(av[p], bv[q]);
                    p += 1;
                    q += 1;
                }
            }
        }
        for &x in &av[p..] {
            f(x, 0.0);
        }
        for &y in &bv[q..] {
            f(0.0, y);
        }
    }
}
