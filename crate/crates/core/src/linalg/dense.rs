//! Blocked LU factorization with partial pivoting for column-major dense matrices.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const NB: usize = 64;

/// `C[m×n] -= A[m×k] · B[k×n]`, all views into column-major storage with leading dimension `ld*`.
///
/// # Safety
/// The three regions must be valid for the given extents and must not overlap.
#[allow(clippy::too_many_arguments)]
unsafe fn gemm_sub(
    m: usize,
    k: usize,
    n: usize,
    a: *const f64,
    lda: usize,
    b: *const f64,
    ldb: usize,
    c: *mut f64,
    ldc: usize,
) {
    if m == 0 || k == 0 || n == 0 {
        return;
    }
    matrixmultiply::dgemm(
        m,
        k,
        n,
        -1.0,
        a,
        1,
        lda as isize,
        b,
        1,
        ldb as isize,
        1.0,
        c,
        1,
        ldc as isize,
    );
}

#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: DMatrix<f64>,
    /// Row `j` was swapped with row `piv[j]` at step `j`.
    piv: Vec<usize>,
}

/// Factor `a = P·L·U`. Fails on an exactly zero or non-finite pivot, or when a
/// pivot falls below `1e-14` of the largest entry of `a`.
pub fn lu_factor(mut a: DMatrix<f64>) -> Result<LuFactors> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Singular(format!("matrix is {}x{}, not square", n, a.ncols())));
    }
    let scale = a.amax();
    if !scale.is_finite() {
        return Err(Error::Singular("matrix has non-finite entries".into()));
    }
    let floor = 1e-14 * scale;
    let mut piv = vec![0usize; n];
    let ld = n;
    let data = a.as_mut_slice();

    let mut k0 = 0;
    while k0 < n {
        let kb = NB.min(n - k0);
        let k1 = k0 + kb;
        // panel
        for j in k0..k1 {
            let col = &data[j * ld..(j + 1) * ld];
            let mut p = j;
            let mut best = col[j].abs();
            for (r, v) in col.iter().enumerate().skip(j + 1) {
                if v.abs() > best {
                    best = v.abs();
                    p = r;
                }
            }
            if !(best > floor) {
                return Err(Error::Singular(format!("pivot {best:.3e} at column {j}")));
            }
            piv[j] = p;
            if p != j {
                for c in 0..n {
                    data.swap(c * ld + j, c * ld + p);
                }
            }
            let inv = 1.0 / data[j * ld + j];
            for v in &mut data[j * ld + j + 1..(j + 1) * ld] {
                *v *= inv;
            }
            for c in j + 1..k1 {
                let f = data[c * ld + j];
                if f == 0.0 {
                    continue;
                }
                let (left, right) = data.split_at_mut(c * ld);
                let lcol = &left[j * ld + j + 1..(j + 1) * ld];
                for (t, l) in right[j + 1..ld].iter_mut().zip(lcol) {
                    *t -= l * f;
                }
            }
        }
        if k1 < n {
            // U12 = L11^{-1} A12
            for c in k1..n {
                for j in k0..k1 {
                    let f = data[c * ld + j];
                    if f == 0.0 {
                        continue;
                    }
                    for r in j + 1..k1 {
                        data[c * ld + r] -= data[j * ld + r] * f;
                    }
                }
            }
            // A22 -= L21 · U12
            let base = data.as_mut_ptr();
            unsafe {
                gemm_sub(
                    n - k1,
                    kb,
                    n - k1,
                    base.add(k0 * ld + k1),
                    ld,
                    base.add(k1 * ld + k0),
                    ld,
                    base.add(k1 * ld + k1),
                    ld,
                );
            }
        }
        k0 = k1;
    }
    Ok(LuFactors { lu: a, piv })
}

impl LuFactors {
    pub fn n(&self) -> usize {
        self.piv.len()
    }

    /// `|det|` is rarely needed; the smallest `|U_jj| / max |U_jj|` is a cheap conditioning hint.
    pub fn pivot_ratio(&self) -> f64 {
        let d: Vec<f64> = (0..self.n()).map(|j| self.lu[(j, j)].abs()).collect();
        let max = d.iter().copied().fold(0.0, f64::max);
        d.iter().copied().fold(f64::INFINITY, f64::min) / max
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n();
        assert_eq!(b.len(), n);
        for (j, &p) in self.piv.iter().enumerate() {
            b.swap(j, p);
        }
        let lu = self.lu.as_slice();
        for j in 0..n {
            let f = b[j];
            if f != 0.0 {
                for (r, l) in lu[j * n + j + 1..(j + 1) * n].iter().enumerate() {
                    b[j + 1 + r] -= l * f;
                }
            }
        }
        for j in (0..n).rev() {
            b[j] /= lu[j * n + j];
            let f = b[j];
            if f != 0.0 {
                for (r, u) in lu[j * n..j * n + j].iter().enumerate() {
                    b[r] -= u * f;
                }
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Overwrite `b` (n × m) with `A⁻¹ b`, blocked over the rows.
    pub fn solve_matrix_in_place(&self, b: &mut DMatrix<f64>) {
        let n = self.n();
        assert_eq!(b.nrows(), n);
        let m = b.ncols();
        for (j, &p) in self.piv.iter().enumerate() {
            if p != j {
                b.swap_rows(j, p);
            }
        }
        let lu = self.lu.as_slice();
        let lp = lu.as_ptr();
        let bd = b.as_mut_slice();
        // forward, unit lower
        let mut k0 = 0;
        while k0 < n {
            let k1 = (k0 + NB).min(n);
            for c in 0..m {
                let col = &mut bd[c * n..(c + 1) * n];
                for j in k0..k1 {
                    let f = col[j];
                    if f != 0.0 {
                        for r in j + 1..k1 {
                            col[r] -= lu[j * n + r] * f;
                        }
                    }
                }
            }
            if k1 < n {
                let bp = bd.as_mut_ptr();
                unsafe {
                    gemm_sub(n - k1, k1 - k0, m, lp.add(k0 * n + k1), n, bp.add(k0), n, bp.add(k1), n);
                }
            }
            k0 = k1;
        }
        // backward, upper
        let mut k1 = n;
        while k1 > 0 {
            let k0 = k1.saturating_sub(NB);
            for c in 0..m {
                let col = &mut bd[c * n..(c + 1) * n];
                for j in (k0..k1).rev() {
                    col[j] /= lu[j * n + j];
                    let f = col[j];
                    if f != 0.0 {
                        for r in k0..j {
                            col[r] -= lu[j * n + r] * f;
                        }
                    }
                }
            }
            if k0 > 0 {
                let bp = bd.as_mut_ptr();
                unsafe {
                    gemm_sub(k0, k1 - k0, m, lp.add(k0 * n), n, bp.add(k0), n, bp, n);
                }
            }
            k1 = k0;
        }
    }
}
