//! Structure of assembled stiffness matrices: dense nonlocal blocks, nonzero
//! count and a coarse occupancy bitmap.

use serde::Serialize;

use crate::linalg::LinearSystem;

#[derive(Debug, Clone, Serialize)]
pub struct SparsityReport {
    pub n: usize,
    /// Stored dense blocks holding at least one nonzero.
    pub dense_blocks: usize,
    /// Distinct `(row, col)` positions with a nonzero summed value.
    pub nonzeros: usize,
    /// Side length of the occupancy grid.
    pub resolution: usize,
    /// `occupancy[r][c]` is set when any nonzero falls into that tile.
    pub occupancy: Vec<Vec<bool>>,
}

impl SparsityReport {
    pub fn density(&self) -> f64 {
        self.nonzeros as f64 / (self.n as f64 * self.n as f64)
    }

    /// Plain PBM bitmap (`P1`), nonzeros white as in the usual spy plots.
    pub fn to_pbm(&self) -> String {
        let mut s = format!("P1\n{} {}\n", self.resolution, self.resolution);
        for row in &self.occupancy {
            let line: Vec<&str> = row.iter().map(|&b| if b { "0" } else { "1" }).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    /// One line per tile row, `1` for occupied tiles.
    pub fn to_csv_mask(&self) -> String {
        let mut s = String::new();
        for row in &self.occupancy {
            let line: Vec<&str> = row.iter().map(|&b| if b { "1" } else { "0" }).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }
}

/// Count structure of `sys`; `resolution` caps the bitmap side (full size when larger than `n`).
pub fn sparsity_report(sys: &LinearSystem, resolution: usize) -> SparsityReport {
    let n = sys.n();
    let res = resolution.clamp(1, n.max(1));
    let tile = |k: usize| k * res / n;
    let mut occupancy = vec![vec![false; res]; res];
    let mut acc = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut seen = vec![false; n];
    let mut nonzeros = 0;
    let mut by_row: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (b, block) in sys.blocks().iter().enumerate() {
        for r in block.rows() {
            by_row[r].push(b);
        }
    }
    for r in 0..n {
        let mut touch = |c: usize, v: f64, acc: &mut Vec<f64>| {
            if !seen[c] {
                seen[c] = true;
                touched.push(c);
            }
            acc[c] += v;
        };
        for &(c, v) in sys.sparse_row(r) {
            touch(c, v, &mut acc);
        }
        for &b in &by_row[r] {
            let block = &sys.blocks()[b];
            let lr = r - block.row0;
            for (k, c) in block.cols().enumerate() {
                let v = block.matrix[(lr, k)];
                if v != 0.0 {
                    touch(c, v, &mut acc);
                }
            }
        }
        for &c in &touched {
            if acc[c] != 0.0 {
                nonzeros += 1;
                occupancy[tile(r)][tile(c)] = true;
            }
            acc[c] = 0.0;
            seen[c] = false;
        }
        touched.clear();
    }
    let dense_blocks = sys
        .blocks()
        .iter()
        .filter(|b| b.matrix.iter().any(|v| *v != 0.0))
        .count();
    SparsityReport {
        n,
        dense_blocks,
        nonzeros,
        resolution: res,
        occupancy,
    }
}
