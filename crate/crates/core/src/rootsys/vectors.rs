//! Compact row storage for center-vector families.
//!
//! Root vectors have two nonzero coordinates and interpolated vectors have
//! three, so families are kept in compressed sparse rows. A rank-384 root set
//! (147,840 vectors of length 385) then costs a few megabytes instead of
//! roughly half a gigabyte of dense `f64`.

/// Borrowed view of one sparse row.
#[derive(Debug, Clone, Copy)]
pub struct SparseRow<'a> {
    pub indices: &'a [u32],
    pub values: &'a [f64],
}

impl SparseRow<'_> {
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices
            .iter()
            .zip(self.values)
            .map(|(&i, &v)| (i as usize, v))
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn dot(&self, other: &SparseRow<'_>) -> f64 {
        let (mut a, mut b) = (0, 0);
        let mut acc = 0.0;
        while a < self.indices.len() && b < other.indices.len() {
            match self.indices[a].cmp(&other.indices[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[a] * other.values[b];
                    a += 1;
                    b += 1;
                }
            }
        }
        acc
    }

    pub fn write_dense(&self, out: &mut [f64]) {
        out.fill(0.0);
        for (i, v) in self.iter() {
            out[i] = v;
        }
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        self.write_dense(&mut out);
        out
    }
}

/// An ordered list of equal-length real vectors in compressed sparse row form.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSet {
    dim: usize,
    offsets: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl VectorSet {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            offsets: vec![0],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn with_capacity(dim: usize, rows: usize, nnz_per_row: usize) -> Self {
        let mut offsets = Vec::with_capacity(rows + 1);
        offsets.push(0);
        Self {
            dim,
            offsets,
            indices: Vec::with_capacity(rows * nnz_per_row),
            values: Vec::with_capacity(rows * nnz_per_row),
        }
    }

    pub fn from_dense_rows<R: AsRef<[f64]>>(dim: usize, rows: impl IntoIterator<Item = R>) -> Self {
        let mut set = Self::new(dim);
        for row in rows {
            set.push_dense(row.as_ref());
        }
        set
    }

    /// Appends a row given as `(coordinate, value)` entries. Entries must be in
    /// strictly increasing coordinate order; exact zeros are dropped.
    pub fn push_sparse(&mut self, entries: impl IntoIterator<Item = (usize, f64)>) {
        let mut last: Option<usize> = None;
        for (i, v) in entries {
            assert!(i < self.dim, "coordinate {i} out of range for dim {}", self.dim);
            assert!(last.is_none_or(|l| l < i), "sparse entries must be strictly increasing");
            last = Some(i);
            if v != 0.0 {
                self.indices.push(i as u32);
                self.values.push(v);
            }
        }
        self.offsets.push(self.indices.len());
    }

    pub fn push_dense(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.dim, "row length must equal dim");
        self.push_sparse(row.iter().copied().enumerate());
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row(&self, i: usize) -> SparseRow<'_> {
        let (lo, hi) = (self.offsets[i], self.offsets[i + 1]);
        SparseRow {
            indices: &self.indices[lo..hi],
            values: &self.values[lo..hi],
        }
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = SparseRow<'_>> + '_ {
        (0..self.len()).map(move |i| self.row(i))
    }

    pub fn dense_row(&self, i: usize) -> Vec<f64> {
        self.row(i).to_dense(self.dim)
    }

    pub fn dot(&self, a: usize, b: usize) -> f64 {
        self.row(a).dot(&self.row(b))
    }

    pub fn norm_sq(&self, i: usize) -> f64 {
        self.row(i).norm_sq()
    }

    /// Cosine of the angle between rows `a` and `b`, clamped to [-1, 1].
    pub fn cos_between(&self, a: usize, b: usize) -> f64 {
        let c = self.dot(a, b) / (self.norm_sq(a) * self.norm_sq(b)).sqrt();
        c.clamp(-1.0, 1.0)
    }

    /// Returns a new set whose row `k` is row `order[k]` of `self`.
    pub fn reordered(&self, order: &[usize]) -> Self {
        let mut out = Self::with_capacity(self.dim, order.len(), self.indices.len() / self.len().max(1));
        for &src in order {
            let row = self.row(src);
            out.indices.extend_from_slice(row.indices);
            out.values.extend_from_slice(row.values);
            out.offsets.push(out.indices.len());
        }
        out
    }

    pub fn truncated(&self, n: usize) -> Self {
        let n = n.min(self.len());
        let end = self.offsets[n];
        Self {
            dim: self.dim,
            offsets: self.offsets[..=n].to_vec(),
            indices: self.indices[..end].to_vec(),
            values: self.values[..end].to_vec(),
        }
    }

    pub fn extend_from(&mut self, other: &VectorSet) {
        assert_eq!(self.dim, other.dim);
        let base = self.indices.len();
        self.indices.extend_from_slice(&other.indices);
        self.values.extend_from_slice(&other.values);
        self.offsets
            .extend(other.offsets[1..].iter().map(|o| o + base));
    }
}
