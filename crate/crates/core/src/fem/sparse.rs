use std::fmt::Write as _;

/// Symmetric sparse matrix stored as full CSR (both triangles) with sorted columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<u32>,
    pub val: Vec<f64>,
}

impl SparseSymMatrix {
    /// Builds from upper-triangle entries (i ≤ j), summing duplicates. The
    /// duplicates of each entry are summed in sorted order, so the result does
    /// not depend on the order of `entries`.
    pub fn from_upper_triplets(n: usize, mut entries: Vec<(u32, u32, f64)>) -> Self {
        use rayon::slice::ParallelSliceMut;
        entries.par_sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));
        let mut upper: Vec<(u32, u32, f64)> = Vec::new();
        for (i, j, v) in entries {
            match upper.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => upper.push((i, j, v)),
            }
        }
        let mut count = vec![0usize; n + 1];
        for &(i, j, _) in &upper {
            count[i as usize + 1] += 1;
            if i != j {
                count[j as usize + 1] += 1;
            }
        }
        for k in 0..n {
            count[k + 1] += count[k];
        }
        let row_ptr = count.clone();
        let nnz = row_ptr[n];
        let mut col = vec![0u32; nnz];
        let mut val = vec![0.0; nnz];
        let mut next = count;
        // Upper entries are sorted by (i, j): rows fill left to right once the
        // mirrored lower entries (j < i) are placed first.
        for &(i, j, v) in &upper {
            if i != j {
                let r = j as usize;
                col[next[r]] = i;
                val[next[r]] = v;
                next[r] += 1;
            }
        }
        for &(i, j, v) in &upper {
            let r = i as usize;
            col[next[r]] = j;
            val[next[r]] = v;
            next[r] += 1;
        }
        SparseSymMatrix { n, row_ptr, col, val }
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col[r.clone()], &self.val[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (c, v) = self.row(i);
        match c.binary_search(&(j as u32)) {
            Ok(k) => v[k],
            Err(_) => 0.0,
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let (c, v) = self.row(i);
            *yi = c.iter().zip(v).map(|(&j, a)| a * x[j as usize]).sum();
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    pub fn quad_form(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.n)
            .map(|i| {
                let (c, v) = self.row(i);
                x[i] * c.iter().zip(v).map(|(&j, a)| a * y[j as usize]).sum::<f64>()
            })
            .sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.val.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// a·self + b·other; both matrices must share the sparsity pattern.
    pub fn combine(&self, a: f64, other: &SparseSymMatrix, b: f64) -> SparseSymMatrix {
        assert!(self.row_ptr == other.row_ptr && self.col == other.col, "sparsity patterns differ");
        SparseSymMatrix {
            n: self.n,
            row_ptr: self.row_ptr.clone(),
            col: self.col.clone(),
            val: self.val.iter().zip(&other.val).map(|(x, y)| a * x + b * y).collect(),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| {
            let (c, v) = self.row(i);
            c.iter().zip(v).all(|(&j, &x)| self.get(j as usize, i) == x)
        })
    }

    /// Principal submatrix on `keep` (sorted indices).
    pub fn restrict(&self, keep: &[usize]) -> SparseSymMatrix {
        let mut map = vec![u32::MAX; self.n];
        for (k, &i) in keep.iter().enumerate() {
            map[i] = k as u32;
        }
        let mut row_ptr = vec![0usize];
        let mut col = Vec::new();
        let mut val = Vec::new();
        for &i in keep {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                if map[j as usize] != u32::MAX {
                    col.push(map[j as usize]);
                    val.push(x);
                }
            }
            row_ptr.push(col.len());
        }
        SparseSymMatrix { n: keep.len(), row_ptr, col, val }
    }

    /// One "row col value" line per stored entry.
    pub fn to_coo_text(&self) -> String {
        let mut s = String::new();
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (j, x) in c.iter().zip(v) {
                let _ = writeln!(s, "{i} {j} {x:e}");
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_build_symmetric_csr() {
        let m = SparseSymMatrix::from_upper_triplets(3, vec![(0, 0, 2.0), (0, 1, -1.0), (1, 1, 2.0), (0, 1, 0.5), (2, 2, 1.0), (1, 2, 3.0)]);
        assert_eq!(m.get(1, 0), -0.5);
        assert_eq!(m.get(0, 1), -0.5);
        assert_eq!(m.get(2, 1), 3.0);
        assert_eq!(m.get(0, 2), 0.0);
        assert!(m.is_symmetric());
        assert_eq!(m.mul(&[1.0, 1.0, 1.0]), vec![1.5, 4.5, 4.0]);
        assert_eq!(m.restrict(&[1, 2]).mul(&[1.0, 1.0]), vec![5.0, 4.0]);
        assert_eq!(m.to_coo_text().lines().count(), m.nnz());
    }
}
