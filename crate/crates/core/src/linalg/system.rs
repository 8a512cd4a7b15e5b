//! Square linear systems with a sparse local part plus dense rectangular blocks.

use nalgebra::DMatrix;

/// Dense sub-matrix added to the system at `(row0, col0)`.
#[derive(Debug, Clone)]
pub struct DenseBlock {
    pub row0: usize,
    pub col0: usize,
    pub matrix: DMatrix<f64>,
}

impl DenseBlock {
    pub fn rows(&self) -> std::ops::Range<usize> {
        self.row0..self.row0 + self.matrix.nrows()
    }

    pub fn cols(&self) -> std::ops::Range<usize> {
        self.col0..self.col0 + self.matrix.ncols()
    }
}

/// `A x = b` where `A` is the sum of per-row sparse entries (duplicates add)
/// and any number of dense blocks.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
    blocks: Vec<DenseBlock>,
    pub rhs: Vec<f64>,
}

impl LinearSystem {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            rows: vec![Vec::new(); n],
            blocks: Vec::new(),
            rhs: vec![0.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.n && col < self.n);
        if value != 0.0 {
            self.rows[row].push((col, value));
        }
    }

    pub fn add_block(&mut self, row0: usize, col0: usize, matrix: DMatrix<f64>) {
        assert!(row0 + matrix.nrows() <= self.n && col0 + matrix.ncols() <= self.n);
        self.blocks.push(DenseBlock { row0, col0, matrix });
    }

    pub fn blocks(&self) -> &[DenseBlock] {
        &self.blocks
    }

    /// Remove every contribution to `row`, including its share of dense blocks.
    pub fn clear_row(&mut self, row: usize) {
        self.rows[row].clear();
        for b in &mut self.blocks {
            if b.rows().contains(&row) {
                b.matrix.row_mut(row - b.row0).fill(0.0);
            }
        }
        self.rhs[row] = 0.0;
    }

    pub fn replace_row(&mut self, row: usize, entries: &[(usize, f64)], rhs: f64) {
        self.clear_row(row);
        for &(c, v) in entries {
            self.add(row, c, v);
        }
        self.rhs[row] = rhs;
    }

    /// Sort and merge duplicate sparse entries, dropping exact zeros.
    pub fn compress(&mut self) {
        for row in &mut self.rows {
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for &(c, v) in row.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => merged.push((c, v)),
                }
            }
            merged.retain(|e| e.1 != 0.0);
            *row = merged;
        }
    }

    pub fn sparse_row(&self, row: usize) -> &[(usize, f64)] {
        &self.rows[row]
    }

    pub fn sparse_nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = row.iter().map(|&(c, v)| v * x[c]).sum();
        }
        for b in &self.blocks {
            let xs = &x[b.cols()];
            for (k, &xk) in xs.iter().enumerate() {
                if xk == 0.0 {
                    continue;
                }
                for (o, &a) in out[b.rows()].iter_mut().zip(b.matrix.column(k).iter()) {
                    *o += a * xk;
                }
            }
        }
    }

    /// `‖b - A x‖₂ / ‖b‖₂`.
    pub fn relative_residual(&self, x: &[f64]) -> f64 {
        let mut ax = vec![0.0; self.n];
        self.matvec(x, &mut ax);
        let r: f64 = ax.iter().zip(&self.rhs).map(|(a, b)| (b - a) * (b - a)).sum();
        let b: f64 = self.rhs.iter().map(|v| v * v).sum();
        (r / b.max(f64::MIN_POSITIVE)).sqrt()
    }

    /// Rows and columns in `range`, renumbered from zero.
    pub fn principal_subsystem(&self, range: std::ops::Range<usize>) -> LinearSystem {
        let (lo, hi) = (range.start, range.end);
        let mut sub = LinearSystem::new(hi - lo);
        for r in range.clone() {
            for &(c, v) in &self.rows[r] {
                if (lo..hi).contains(&c) {
                    sub.rows[r - lo].push((c - lo, v));
                }
            }
            sub.rhs[r - lo] = self.rhs[r];
        }
        for b in &self.blocks {
            let (r0, r1) = (b.row0.max(lo), (b.row0 + b.matrix.nrows()).min(hi));
            let (c0, c1) = (b.col0.max(lo), (b.col0 + b.matrix.ncols()).min(hi));
            if r0 < r1 && c0 < c1 {
                let m = b
                    .matrix
                    .view((r0 - b.row0, c0 - b.col0), (r1 - r0, c1 - c0))
                    .into_owned();
                sub.add_block(r0 - lo, c0 - lo, m);
            }
        }
        sub
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                m[(r, c)] += v;
            }
        }
        for b in &self.blocks {
            let mut view = m.view_mut((b.row0, b.col0), b.matrix.shape());
            view += &b.matrix;
        }
        m
    }
}
