//! Compressed sparse row storage for layer weights.
//!
//! Every network built by the calculus is block structured (identity blocks,
//! block-diagonal stacks, `[I | -I]` splices), so the nonzero count grows far
//! more slowly than `rows * cols`. Only the operations the calculus needs are
//! provided: block stacking, scaling, row negation and matrix-vector products.

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, row_ptr: vec![0; rows + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, scale: f64) -> Self {
        Self { rows: n, cols: n, row_ptr: (0..=n).collect(), col_idx: (0..n as u32).collect(), values: vec![scale; n] }
    }

    /// Builds from dense rows, dropping exact zeros.
    ///
    /// # Panics
    /// If the rows are ragged.
    pub fn from_dense(rows: &[Vec<f64>], cols: usize) -> Self {
        let mut m = Self::zeros(0, cols);
        m.row_ptr.clear();
        m.row_ptr.push(0);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged dense matrix");
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    m.col_idx.push(j as u32);
                    m.values.push(v);
                }
            }
            m.row_ptr.push(m.values.len());
        }
        m.rows = rows.len();
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterator over `(col, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[span.clone()].iter().zip(&self.values[span]).map(|(&j, &v)| (j as usize, v))
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| {
                let mut row = vec![0.0; self.cols];
                for (j, v) in self.row(i) {
                    row[j] = v;
                }
                row
            })
            .collect()
    }

    /// `out = self * x`.
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k] as usize];
            }
            *o = acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.mul_vec_into(x, &mut out);
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= s);
        m
    }

    /// Stacks matrices on top of each other. All must share the column count.
    pub fn vstack(blocks: &[&CsrMatrix]) -> Self {
        let cols = blocks.first().map_or(0, |b| b.cols);
        let mut out = Self::zeros(0, cols);
        for b in blocks {
            assert_eq!(b.cols, cols, "vstack: column mismatch");
            let base = out.values.len();
            out.col_idx.extend_from_slice(&b.col_idx);
            out.values.extend_from_slice(&b.values);
            out.row_ptr.extend(b.row_ptr[1..].iter().map(|p| p + base));
            out.rows += b.rows;
        }
        out
    }

    /// Places matrices side by side. All must share the row count.
    pub fn hstack(blocks: &[&CsrMatrix]) -> Self {
        let rows = blocks.first().map_or(0, |b| b.rows);
        let cols: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(0, cols);
        out.rows = rows;
        for i in 0..rows {
            let mut offset = 0u32;
            for b in blocks {
                assert_eq!(b.rows, rows, "hstack: row mismatch");
                for (j, v) in b.row(i) {
                    out.col_idx.push(j as u32 + offset);
                    out.values.push(v);
                }
                offset += b.cols as u32;
            }
            out.row_ptr.push(out.values.len());
        }
        out
    }

    pub fn block_diag(blocks: &[&CsrMatrix]) -> Self {
        let cols: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(0, cols);
        let mut offset = 0u32;
        for b in blocks {
            let base = out.values.len();
            out.col_idx.extend(b.col_idx.iter().map(|j| j + offset));
            out.values.extend_from_slice(&b.values);
            out.row_ptr.extend(b.row_ptr[1..].iter().map(|p| p + base));
            out.rows += b.rows;
            offset += b.cols as u32;
        }
        out
    }
}
