//! Symmetric sparse matrices stored as their lower triangle in CSC form.

use std::fmt::Write as _;
use std::sync::Arc;

/// Lower-triangular CSC sparsity pattern of a symmetric matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymPattern {
    pub n: usize,
    pub col_ptr: Vec<usize>,
    /// Row indices, sorted within each column, all `>= column`.
    pub row_idx: Vec<usize>,
}

impl SymPattern {
    /// Pattern of the union of dense blocks over each index list.
    pub fn from_cliques<'a>(n: usize, cliques: impl Iterator<Item = &'a [usize]>) -> Self {
        let mut cols: Vec<Vec<usize>> = vec![Vec::new(); n];
        for clique in cliques {
            for &c in clique {
                for &r in clique {
                    if r >= c {
                        cols[c].push(r);
                    }
                }
            }
        }
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut row_idx = Vec::new();
        col_ptr.push(0);
        for mut col in cols {
            col.sort_unstable();
            col.dedup();
            row_idx.extend_from_slice(&col);
            col_ptr.push(row_idx.len());
        }
        Self {
            n,
            col_ptr,
            row_idx,
        }
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    /// Storage position of entry `(row, col)` with `row >= col`.
    pub fn position(&self, row: usize, col: usize) -> Option<usize> {
        let (lo, hi) = (self.col_ptr[col], self.col_ptr[col + 1]);
        self.row_idx[lo..hi]
            .binary_search(&row)
            .ok()
            .map(|k| lo + k)
    }

    /// Pattern restricted to the kept indices, with the source position of each kept entry.
    pub fn restrict(&self, new_index: &[Option<usize>], n_new: usize) -> (SymPattern, Vec<usize>) {
        let mut col_ptr = vec![0; n_new + 1];
        let mut row_idx = Vec::new();
        let mut source = Vec::new();
        let mut entries: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_new];
        for c in 0..self.n {
            let Some(nc) = new_index[c] else { continue };
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                if let Some(nr) = new_index[self.row_idx[k]] {
                    // a monotone renumbering keeps rows below the diagonal
                    let (r, cc) = if nr >= nc { (nr, nc) } else { (nc, nr) };
                    entries[cc].push((r, k));
                }
            }
        }
        for (c, mut list) in entries.into_iter().enumerate() {
            list.sort_unstable();
            for (r, k) in list {
                row_idx.push(r);
                source.push(k);
            }
            col_ptr[c + 1] = row_idx.len();
        }
        (
            SymPattern {
                n: n_new,
                col_ptr,
                row_idx,
            },
            source,
        )
    }
}

/// Symmetric matrix sharing a lower-triangular pattern.
#[derive(Debug, Clone)]
pub struct SymCsc {
    pub pattern: Arc<SymPattern>,
    pub values: Vec<f64>,
}

impl SymCsc {
    pub fn zeros(pattern: Arc<SymPattern>) -> Self {
        let nnz = pattern.nnz();
        Self {
            pattern,
            values: vec![0.0; nnz],
        }
    }

    pub fn n(&self) -> usize {
        self.pattern.n
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let p = &*self.pattern;
        y.iter_mut().for_each(|v| *v = 0.0);
        for c in 0..p.n {
            let xc = x[c];
            let mut acc = 0.0;
            for k in p.col_ptr[c]..p.col_ptr[c + 1] {
                let r = p.row_idx[k];
                let a = self.values[k];
                if r == c {
                    acc += a * xc;
                } else {
                    y[r] += a * xc;
                    acc += a * x[r];
                }
            }
            y[c] += acc;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n()];
        self.matvec(x, &mut y);
        y
    }

    /// `x^T A x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.apply(x))
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let (r, c) = if row >= col { (row, col) } else { (col, row) };
        self.pattern.position(r, c).map_or(0.0, |k| self.values[k])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.get(i, i)).collect()
    }

    /// `self + alpha * other` on the same pattern.
    pub fn axpy(&self, alpha: f64, other: &SymCsc) -> SymCsc {
        assert!(Arc::ptr_eq(&self.pattern, &other.pattern) || self.pattern == other.pattern);
        SymCsc {
            pattern: self.pattern.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + alpha * b)
                .collect(),
        }
    }

    /// Dense copy (row-major) for small problems.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        let mut d = vec![vec![0.0; n]; n];
        let p = &*self.pattern;
        for c in 0..n {
            for k in p.col_ptr[c]..p.col_ptr[c + 1] {
                let r = p.row_idx[k];
                d[r][c] = self.values[k];
                d[c][r] = self.values[k];
            }
        }
        d
    }

    /// Rows sorted within each column and stored in the lower triangle.
    pub fn is_well_formed(&self) -> bool {
        let p = &*self.pattern;
        (0..p.n).all(|c| {
            let rows = &p.row_idx[p.col_ptr[c]..p.col_ptr[c + 1]];
            rows.windows(2).all(|w| w[0] < w[1]) && rows.iter().all(|&r| r >= c && r < p.n)
        })
    }

    /// Coordinate export of the full symmetric matrix: `row col value`, 0-based, 17 digits.
    pub fn to_coordinate_text(&self) -> String {
        let mut s = String::new();
        let p = &*self.pattern;
        let mut entries = Vec::with_capacity(2 * p.nnz());
        for c in 0..p.n {
            for k in p.col_ptr[c]..p.col_ptr[c + 1] {
                let r = p.row_idx[k];
                entries.push((r, c, self.values[k]));
                if r != c {
                    entries.push((c, r, self.values[k]));
                }
            }
        }
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        for (r, c, v) in entries {
            let _ = writeln!(s, "{r} {c} {v:.16e}");
        }
        s
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
