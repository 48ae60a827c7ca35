use std::io::{self, Write};

/// Coordinate-format accumulator. Duplicate entries are summed on
/// compression in insertion order.
#[derive(Debug, Clone, Default)]
pub struct Triplets {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, entries: Vec::new() }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        Self { nrows, ncols, entries: Vec::with_capacity(cap) }
    }

    #[inline]
    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.entries.push((row, col, value));
    }

    pub fn extend(&mut self, other: Triplets) {
        self.entries.extend(other.entries);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn into_csr(self) -> CsrMatrix {
        CsrMatrix::from_triplets(self.nrows, self.ncols, self.entries)
    }
}

/// Compressed sparse row matrix with sorted, unique column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from `(row, col, value)` entries. The sort is stable,
    /// so the summation order of duplicates is the insertion order and the
    /// result is bit-reproducible. Entries that sum to exactly zero are
    /// dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        let mut rows = Vec::with_capacity(entries.len());
        let mut i = 0;
        while i < entries.len() {
            let (r, c, mut v) = entries[i];
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            i += 1;
            while i < entries.len() && entries[i].0 == r && entries[i].1 == c {
                v += entries[i].2;
                i += 1;
            }
            if v != 0.0 {
                rows.push(r);
                col_idx.push(c);
                values.push(v);
            }
        }
        for &r in &rows {
            row_ptr[r + 1] += 1;
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { nrows, ncols, row_ptr, col_idx, values }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), ncols, "ragged dense input");
            for (j, &v) in row.iter().enumerate() {
                entries.push((i, j, v));
            }
        }
        Self::from_triplets(nrows, ncols, entries)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterates over the stored `(col, value)` pairs of one row.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "dimension mismatch in mat-vec");
        (0..self.nrows).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    /// `y = Aᵀ x`
    pub fn mul_vec_transpose(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows, "dimension mismatch in transposed mat-vec");
        let mut y = vec![0.0; self.ncols];
        for (i, j, v) in self.iter() {
            y[j] += v * x[i];
        }
        y
    }

    pub fn transpose(&self) -> Self {
        let entries = self.iter().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, entries)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// Largest `|a_ij - a_ji|` relative to the largest `|a_ij|`.
    pub fn symmetry_defect(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for (i, j, v) in self.iter() {
            worst = worst.max((v - self.get(j, i)).abs());
        }
        worst / scale
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        self.symmetry_defect() <= rel_tol
    }

    /// Extracts `A[rows, cols]`; `rows`/`cols` list the kept indices in the
    /// order they should appear.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (k, &c) in cols.iter().enumerate() {
            col_map[c] = k;
        }
        let mut entries = Vec::new();
        for (ri, &r) in rows.iter().enumerate() {
            for (c, v) in self.row(r) {
                let k = col_map[c];
                if k != usize::MAX {
                    entries.push((ri, k, v));
                }
            }
        }
        Self::from_triplets(rows.len(), cols.len(), entries)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, j, v) in self.iter() {
            d[i][j] = v;
        }
        d
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows).map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// MatrixMarket coordinate format (general, real, 1-based indices).
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for (i, j, v) in self.iter() {
            writeln!(w, "{} {} {:.17e}", i + 1, j + 1, v)?;
        }
        Ok(())
    }
}

/// Block matrix `[[a, bᵀ], [b, c]]` for symmetric saddle-point layouts.
pub fn symmetric_block(a: &CsrMatrix, b: &CsrMatrix, c: &CsrMatrix) -> CsrMatrix {
    assert_eq!(a.nrows(), a.ncols());
    assert_eq!(c.nrows(), c.ncols());
    assert_eq!(b.ncols(), a.ncols());
    assert_eq!(b.nrows(), c.nrows());
    let n = a.nrows();
    let m = c.nrows();
    let mut entries = Vec::with_capacity(a.nnz() + 2 * b.nnz() + c.nnz());
    entries.extend(a.iter());
    for (i, j, v) in b.iter() {
        entries.push((n + i, j, v));
        entries.push((j, n + i, v));
    }
    entries.extend(c.iter().map(|(i, j, v)| (n + i, n + j, v)));
    CsrMatrix::from_triplets(n + m, n + m, entries)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
