use serde::{Deserialize, Serialize};

/// Sparse matrix stored as a triplet list. Repeated `(row, col)` entries are summed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMatrix {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            nrows: n,
            ncols: n,
            entries: (0..n).map(|i| (i, i, 1.0)).collect(),
        }
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut entries = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), ncols, "ragged dense matrix");
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    entries.push((i, j, v));
                }
            }
        }
        SparseMatrix {
            nrows,
            ncols,
            entries,
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        if value != 0.0 {
            self.entries.push((row, col, value));
        }
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols]; self.nrows];
        for &(i, j, v) in &self.entries {
            out[i][j] += v;
        }
        out
    }

    /// `y = M x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.ncols);
        let mut y = vec![0.0; self.nrows];
        for &(i, j, v) in &self.entries {
            y[i] += v * x[j];
        }
        y
    }

    /// `y = Mᵀ x`
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.nrows);
        let mut y = vec![0.0; self.ncols];
        for &(i, j, v) in &self.entries {
            y[j] += v * x[i];
        }
        y
    }

    /// Entries grouped by row, duplicates merged, columns ascending.
    pub fn rows(&self) -> Vec<Vec<(usize, f64)>> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.nrows];
        for &(i, j, v) in &self.entries {
            rows[i].push((j, v));
        }
        for row in &mut rows {
            row.sort_by_key(|&(j, _)| j);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for &(j, v) in row.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += v,
                    _ => merged.push((j, v)),
                }
            }
            merged.retain(|&(_, v)| v != 0.0);
            *row = merged;
        }
        rows
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries.iter().all(|&(i, j, v)| i == j || v == 0.0)
    }

    /// Largest absolute asymmetry `|M_ij − M_ji|`.
    pub fn asymmetry(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        let mut merged = std::collections::BTreeMap::new();
        for &(i, j, v) in &self.entries {
            *merged.entry((i, j)).or_insert(0.0) += v;
        }
        merged
            .iter()
            .map(|(&(i, j), &v)| {
                let vt = merged.get(&(j, i)).copied().unwrap_or(0.0);
                (v - vt).abs()
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let mut m = SparseMatrix::zeros(2, 2);
        m.push(0, 1, 1.5);
        m.push(0, 1, 0.5);
        m.push(1, 0, 2.0);
        assert_eq!(m.to_dense(), vec![vec![0.0, 2.0], vec![2.0, 0.0]]);
        assert_eq!(m.rows()[0], vec![(1, 2.0)]);
        assert_eq!(m.asymmetry(), 0.0);
        assert_eq!(m.mul_vec(&[1.0, 3.0]), vec![6.0, 2.0]);
        assert_eq!(m.tr_mul_vec(&[1.0, 3.0]), vec![6.0, 2.0]);
    }
}
