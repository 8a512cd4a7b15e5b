//! Solvers for systems that are block tridiagonal under a layer permutation.

use nalgebra::DMatrix;

use super::dense::{lu_factor, LuFactors};
use super::system::LinearSystem;
use crate::error::{Error, Result};

/// Partition of the unknowns into equal-width layers. Rows use the same
/// permutation as columns.
#[derive(Debug, Clone)]
pub struct Layering {
    width: usize,
    /// layered index -> system index
    perm: Vec<usize>,
    /// system index -> layered index
    inv: Vec<usize>,
}

impl Layering {
    pub fn new(perm: Vec<usize>, width: usize) -> Result<Self> {
        let n = perm.len();
        if width == 0 || !n.is_multiple_of(width) {
            return Err(Error::Problem(format!(
                "{n} unknowns do not split into layers of {width}"
            )));
        }
        let mut inv = vec![usize::MAX; n];
        for (k, &p) in perm.iter().enumerate() {
            if p >= n || inv[p] != usize::MAX {
                return Err(Error::Problem("layer map is not a permutation".into()));
            }
            inv[p] = k;
        }
        Ok(Self { width, perm, inv })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn layers(&self) -> usize {
        self.perm.len() / self.width
    }

    fn locate(&self, index: usize) -> (usize, usize) {
        let k = self.inv[index];
        (k / self.width, k % self.width)
    }
}

type Coupling = Vec<(usize, usize, f64)>;

struct LayerRows {
    lower: Coupling,
    diag: DMatrix<f64>,
    upper: Coupling,
    rhs: Vec<f64>,
}

fn extract(sys: &LinearSystem, lay: &Layering, j: usize) -> Result<LayerRows> {
    let m = lay.width;
    let mut out = LayerRows {
        lower: Vec::new(),
        diag: DMatrix::zeros(m, m),
        upper: Vec::new(),
        rhs: vec![0.0; m],
    };
    let place = |out: &mut LayerRows, r: usize, col: usize, v: f64| -> Result<()> {
        let (lc, c) = lay.locate(col);
        if lc == j {
            out.diag[(r, c)] += v;
        } else if lc + 1 == j {
            out.lower.push((r, c, v));
        } else if lc == j + 1 {
            out.upper.push((r, c, v));
        } else if v != 0.0 {
            return Err(Error::Problem(format!(
                "row in layer {j} couples to layer {lc}; system is not block tridiagonal"
            )));
        }
        Ok(())
    };
    for r in 0..m {
        let row = lay.perm[j * m + r];
        out.rhs[r] = sys.rhs[row];
        for &(col, v) in sys.sparse_row(row) {
            place(&mut out, r, col, v)?;
        }
    }
    for b in sys.blocks() {
        for row in b.rows() {
            let (lr, r) = lay.locate(row);
            if lr != j {
                continue;
            }
            for (k, col) in b.cols().enumerate() {
                let v = b.matrix[(row - b.row0, k)];
                if v != 0.0 {
                    place(&mut out, r, col, v)?;
                }
            }
        }
    }
    Ok(out)
}

/// Block LU factorization over the layers (block Thomas algorithm) with
/// partially pivoted dense LU of every Schur complement.
pub struct BlockTridiagonal {
    lay: Layering,
    lower: Vec<Coupling>,
    lus: Vec<LuFactors>,
    /// `S_j⁻¹ C_j` for every layer but the last.
    xs: Vec<DMatrix<f64>>,
}

impl BlockTridiagonal {
    pub fn factor(sys: &LinearSystem, lay: Layering) -> Result<Self> {
        let m = lay.width;
        let nl = lay.layers();
        let mut lower = Vec::with_capacity(nl);
        let mut lus = Vec::with_capacity(nl);
        let mut xs: Vec<DMatrix<f64>> = Vec::with_capacity(nl);
        for j in 0..nl {
            let LayerRows {
                lower: low,
                mut diag,
                upper,
                ..
            } = extract(sys, &lay, j)?;
            if j > 0 {
                let xprev = &xs[j - 1];
                for &(r, c, v) in &low {
                    for k in 0..m {
                        diag[(r, k)] -= v * xprev[(c, k)];
                    }
                }
            } else if !low.is_empty() {
                return Err(Error::Problem("first layer couples below itself".into()));
            }
            let lu = lu_factor(diag).map_err(|e| Error::Singular(format!("layer {j} Schur complement: {e}")))?;
            if j + 1 < nl {
                let mut c = DMatrix::zeros(m, m);
                for &(r, k, v) in &upper {
                    c[(r, k)] += v;
                }
                lu.solve_matrix_in_place(&mut c);
                xs.push(c);
            } else if !upper.is_empty() {
                return Err(Error::Problem("last layer couples above itself".into()));
            }
            lower.push(low);
            lus.push(lu);
        }
        Ok(Self { lay, lower, lus, xs })
    }

    /// Solve for a right-hand side given in system numbering.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; b.len()];
        self.solve_into(b, &mut out);
        out
    }

    pub fn solve_into(&self, b: &[f64], out: &mut [f64]) {
        let m = self.lay.width;
        let nl = self.lay.layers();
        let mut ys: Vec<Vec<f64>> = Vec::with_capacity(nl);
        for j in 0..nl {
            let mut rhs: Vec<f64> = (0..m).map(|r| b[self.lay.perm[j * m + r]]).collect();
            if j > 0 {
                let yprev = &ys[j - 1];
                for &(r, c, v) in &self.lower[j] {
                    rhs[r] -= v * yprev[c];
                }
            }
            self.lus[j].solve_in_place(&mut rhs);
            ys.push(rhs);
        }
        for j in (0..nl.saturating_sub(1)).rev() {
            let (head, tail) = ys.split_at_mut(j + 1);
            let next = &tail[0];
            let y = &mut head[j];
            for (k, &nk) in next.iter().enumerate() {
                if nk == 0.0 {
                    continue;
                }
                for (yr, xr) in y.iter_mut().zip(self.xs[j].column(k).iter()) {
                    *yr -= xr * nk;
                }
            }
        }
        for (j, y) in ys.iter().enumerate() {
            for (r, v) in y.iter().enumerate() {
                out[self.lay.perm[j * m + r]] = *v;
            }
        }
    }
}

/// Direct solve of a system that is block tridiagonal under `lay`.
pub fn solve_block_tridiagonal(sys: &LinearSystem, lay: &Layering) -> Result<Vec<f64>> {
    Ok(BlockTridiagonal::factor(sys, lay.clone())?.solve(&sys.rhs))
}

/// Block-diagonal preconditioner: every diagonal block is a principal
/// subsystem over a contiguous index range, factored exactly over its layers.
pub struct BlockDiagonal {
    parts: Vec<(std::ops::Range<usize>, BlockTridiagonal)>,
}

impl BlockDiagonal {
    pub fn new(sys: &LinearSystem, parts: Vec<(std::ops::Range<usize>, Layering)>) -> Result<Self> {
        let parts = parts
            .into_iter()
            .map(|(range, lay)| {
                let sub = sys.principal_subsystem(range.clone());
                Ok((range, BlockTridiagonal::factor(&sub, lay)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { parts })
    }

    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        out.copy_from_slice(v);
        for (range, f) in &self.parts {
            f.solve_into(&v[range.clone()], &mut out[range.clone()]);
        }
    }
}
