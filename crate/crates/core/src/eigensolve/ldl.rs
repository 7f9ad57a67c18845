use crate::fem::SparseSymMatrix;

use super::order::nested_dissection;

const NONE: usize = usize::MAX;

/// Ordering and elimination tree of a sparsity pattern; shared by every
/// factorization of K − σM.
#[derive(Debug, Clone)]
pub struct Symbolic {
    pub perm: Vec<usize>,
    inv: Vec<usize>,
    parent: Vec<usize>,
    col_ptr: Vec<usize>,
}

impl Symbolic {
    pub fn new(a: &SparseSymMatrix) -> Self {
        let n = a.n;
        let perm = nested_dissection(a);
        let mut inv = vec![0; n];
        for (k, &p) in perm.iter().enumerate() {
            inv[p] = k;
        }
        let mut parent = vec![NONE; n];
        let mut flag = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            flag[k] = k;
            for &j in a.row(perm[k]).0 {
                let mut i = inv[j as usize];
                if i >= k {
                    continue;
                }
                while flag[i] != k {
                    if parent[i] == NONE {
                        parent[i] = k;
                    }
                    lnz[i] += 1;
                    flag[i] = k;
                    i = parent[i];
                }
            }
        }
        let mut col_ptr = vec![0; n + 1];
        for k in 0..n {
            col_ptr[k + 1] = col_ptr[k] + lnz[k];
        }
        Symbolic { perm, inv, parent, col_ptr }
    }

    /// Entries of the strictly lower factor.
    pub fn nnz(&self) -> usize {
        self.col_ptr[self.perm.len()]
    }

    /// Up-looking LDLᵀ with 1×1 pivots. Fails on a pivot below
    /// `pivot_tol`·max|a_ij|.
    pub fn factor(&self, a: &SparseSymMatrix, pivot_tol: f64) -> Result<Ldl, usize> {
        let n = a.n;
        let scale = a.val.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let nnz = self.nnz();
        let mut li = vec![0u32; nnz];
        let mut lx = vec![0.0; nnz];
        let mut d = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut flag = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        let mut pattern = vec![0usize; n];
        for k in 0..n {
            let mut top = n;
            flag[k] = k;
            let (cols, vals) = a.row(self.perm[k]);
            for (&j, &v) in cols.iter().zip(vals) {
                let mut i = self.inv[j as usize];
                if i > k {
                    continue;
                }
                y[i] += v;
                let mut len = 0;
                while flag[i] != k {
                    pattern[len] = i;
                    len += 1;
                    flag[i] = k;
                    i = self.parent[i];
                }
                while len > 0 {
                    top -= 1;
                    len -= 1;
                    pattern[top] = pattern[len];
                }
            }
            let mut dk = y[k];
            y[k] = 0.0;
            for &i in &pattern[top..n] {
                let yi = y[i];
                y[i] = 0.0;
                let p0 = self.col_ptr[i];
                let p2 = p0 + lnz[i];
                for p in p0..p2 {
                    y[li[p] as usize] -= lx[p] * yi;
                }
                let l_ki = yi / d[i];
                dk -= l_ki * yi;
                li[p2] = k as u32;
                lx[p2] = l_ki;
                lnz[i] += 1;
            }
            if !(dk.abs() > pivot_tol * scale) {
                return Err(k);
            }
            d[k] = dk;
        }
        Ok(Ldl { symbolic: self.clone(), li, lx, d })
    }
}

/// A factorization P(A)Pᵀ = LDLᵀ.
#[derive(Debug, Clone)]
pub struct Ldl {
    symbolic: Symbolic,
    li: Vec<u32>,
    lx: Vec<f64>,
    d: Vec<f64>,
}

impl Ldl {
    /// Number of negative pivots: by Sylvester's law, the number of
    /// eigenvalues of (K, M) below σ when A = K − σM.
    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|&&x| x < 0.0).count()
    }

    pub fn solve(&self, b: &[f64], x: &mut [f64]) {
        let s = &self.symbolic;
        let n = self.d.len();
        let mut w: Vec<f64> = s.perm.iter().map(|&p| b[p]).collect();
        for j in 0..n {
            let wj = w[j];
            if wj != 0.0 {
                for p in s.col_ptr[j]..s.col_ptr[j + 1] {
                    w[self.li[p] as usize] -= self.lx[p] * wj;
                }
            }
        }
        for (wj, dj) in w.iter_mut().zip(&self.d) {
            *wj /= dj;
        }
        for j in (0..n).rev() {
            let mut wj = w[j];
            for p in s.col_ptr[j]..s.col_ptr[j + 1] {
                wj -= self.lx[p] * w[self.li[p] as usize];
            }
            w[j] = wj;
        }
        for (k, &p) in s.perm.iter().enumerate() {
            x[p] = w[k];
        }
    }
}
