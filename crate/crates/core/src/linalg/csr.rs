use std::io::Write;

use crate::error::{Error, Result};

/// Compressed sparse row matrix with sorted, duplicate-free column indices.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a canonical CSR matrix, summing duplicate entries.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut counts = vec![0usize; nrows + 1];
        for &(r, c, _) in triplets {
            if r >= nrows || c >= ncols {
                return Err(Error::IndexOutOfRange {
                    row: r,
                    col: c,
                    nrows,
                    ncols,
                });
            }
            counts[r + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        // bucket by row, then sort and merge each row
        let mut fill = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(r, c, v) in triplets {
            let p = fill[r];
            cols[p] = c;
            vals[p] = v;
            fill[r] += 1;
        }
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::with_capacity(triplets.len());
        let mut data = Vec::with_capacity(triplets.len());
        indptr.push(0);
        let mut row_buf: Vec<(usize, f64)> = Vec::new();
        for r in 0..nrows {
            row_buf.clear();
            row_buf.extend((counts[r]..counts[r + 1]).map(|p| (cols[p], vals[p])));
            row_buf.sort_unstable_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for &(c, v) in &row_buf {
                if last == Some(c) {
                    *data.last_mut().unwrap() += v;
                } else {
                    indices.push(c);
                    data.push(v);
                    last = Some(c);
                }
            }
            indptr.push(indices.len());
        }
        Ok(CsrMatrix {
            nrows,
            ncols,
            indptr,
            indices,
            data,
        })
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            data: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            data: vec![1.0; n],
        }
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut t = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::DimensionMismatch {
                    context: "from_dense row length",
                    expected: ncols,
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(nrows, ncols, &t)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    /// Iterator over `(col, value)` of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()]
            .iter()
            .copied()
            .zip(self.data[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.indptr[i]..self.indptr[i + 1];
        match self.indices[r.clone()].binary_search(&j) {
            Ok(p) => self.data[r.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut t = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            t.extend(self.row(i).map(|(j, v)| (i, j, v)));
        }
        t
    }

    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.nrows];
        self.spmv_into(x, &mut y)?;
        Ok(y)
    }

    /// `y = A x`, overwriting `y`.
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch {
                context: "spmv input",
                expected: self.ncols,
                got: x.len(),
            });
        }
        if y.len() != self.nrows {
            return Err(Error::DimensionMismatch {
                context: "spmv output",
                expected: self.nrows,
                got: y.len(),
            });
        }
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
        Ok(())
    }

    /// `y += alpha * A x`.
    pub fn spmv_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.ncols || y.len() != self.nrows {
            return Err(Error::DimensionMismatch {
                context: "spmv_add",
                expected: self.ncols,
                got: x.len(),
            });
        }
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += alpha * self.row(i).map(|(j, v)| v * x[j]).sum::<f64>();
        }
        Ok(())
    }

    /// `y = A^T x`.
    pub fn spmv_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.nrows {
            return Err(Error::DimensionMismatch {
                context: "spmv_transpose input",
                expected: self.nrows,
                got: x.len(),
            });
        }
        let mut y = vec![0.0; self.ncols];
        for (i, &xi) in x.iter().enumerate() {
            for (j, v) in self.row(i) {
                y[j] += v * xi;
            }
        }
        Ok(y)
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut fill = counts.clone();
        let mut indices = vec![0; self.nnz()];
        let mut data = vec![0.0; self.nnz()];
        // rows visited in order, so columns of the transpose come out sorted
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                let p = fill[j];
                indices[p] = i;
                data[p] = v;
                fill[j] += 1;
            }
        }
        CsrMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            indptr: counts,
            indices,
            data,
        }
    }

    pub fn scale(&self, alpha: f64) -> CsrMatrix {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    /// `alpha * self + beta * other`.
    pub fn add_scaled(&self, alpha: f64, other: &CsrMatrix, beta: f64) -> Result<CsrMatrix> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::DimensionMismatch {
                context: "matrix sum",
                expected: self.nrows * self.ncols,
                got: other.nrows * other.ncols,
            });
        }
        let mut t = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.nrows {
            t.extend(self.row(i).map(|(j, v)| (i, j, alpha * v)));
            t.extend(other.row(i).map(|(j, v)| (i, j, beta * v)));
        }
        CsrMatrix::from_triplets(self.nrows, self.ncols, &t)
    }

    /// Sparse product `self * other`.
    pub fn matmul(&self, other: &CsrMatrix) -> Result<CsrMatrix> {
        if self.ncols != other.nrows {
            return Err(Error::DimensionMismatch {
                context: "matmul inner dimension",
                expected: self.ncols,
                got: other.nrows,
            });
        }
        let mut t = Vec::new();
        let mut acc = vec![0.0; other.ncols];
        let mut touched: Vec<usize> = Vec::new();
        let mut mark = vec![false; other.ncols];
        for i in 0..self.nrows {
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    if !mark[j] {
                        mark[j] = true;
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            for &j in &touched {
                t.push((i, j, acc[j]));
                acc[j] = 0.0;
                mark[j] = false;
            }
            touched.clear();
        }
        CsrMatrix::from_triplets(self.nrows, other.ncols, &t)
    }

    /// Assembles a block matrix. `blocks[i][j]` of `None` is a zero block;
    /// every block row needs a height and every block column a width.
    pub fn block(
        row_sizes: &[usize],
        col_sizes: &[usize],
        blocks: &[Vec<Option<&CsrMatrix>>],
    ) -> Result<CsrMatrix> {
        let mut row_off = vec![0];
        for &r in row_sizes {
            row_off.push(row_off.last().unwrap() + r);
        }
        let mut col_off = vec![0];
        for &c in col_sizes {
            col_off.push(col_off.last().unwrap() + c);
        }
        let mut t = Vec::new();
        for (bi, brow) in blocks.iter().enumerate() {
            for (bj, blk) in brow.iter().enumerate() {
                let Some(b) = blk else { continue };
                if b.nrows != row_sizes[bi] {
                    return Err(Error::DimensionMismatch {
                        context: "block rows",
                        expected: row_sizes[bi],
                        got: b.nrows,
                    });
                }
                if b.ncols != col_sizes[bj] {
                    return Err(Error::DimensionMismatch {
                        context: "block cols",
                        expected: col_sizes[bj],
                        got: b.ncols,
                    });
                }
                for (i, j, v) in b.triplets() {
                    t.push((row_off[bi] + i, col_off[bj] + j, v));
                }
            }
        }
        CsrMatrix::from_triplets(*row_off.last().unwrap(), *col_off.last().unwrap(), &t)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest `|A_ij + A_ji|`; zero for an exactly skew-symmetric matrix.
    pub fn skew_defect(&self) -> f64 {
        let t = self.transpose();
        match self.add_scaled(1.0, &t, 1.0) {
            Ok(s) => s.max_abs(),
            Err(_) => f64::INFINITY,
        }
    }

    /// Largest `|A_ij - A_ji|`.
    pub fn symmetry_defect(&self) -> f64 {
        let t = self.transpose();
        match self.add_scaled(1.0, &t, -1.0) {
            Ok(s) => s.max_abs(),
            Err(_) => f64::INFINITY,
        }
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        d
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        let mut d = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                d[(i, j)] = v;
            }
        }
        d
    }

    /// Drops stored entries with `|v| <= tol`.
    pub fn prune(&self, tol: f64) -> CsrMatrix {
        let t: Vec<_> = self
            .triplets()
            .into_iter()
            .filter(|&(_, _, v)| v.abs() > tol)
            .collect();
        CsrMatrix::from_triplets(self.nrows, self.ncols, &t).expect("indices already valid")
    }

    /// Matrix Market coordinate export (1-based indices).
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for (i, j, v) in self.triplets() {
            writeln!(w, "{} {} {:.17e}", i + 1, j + 1, v)?;
        }
        Ok(())
    }

    #[cfg(test)]
    pub(crate) fn check_invariants(&self) -> bool {
        if self.indptr.len() != self.nrows + 1 || self.indptr[self.nrows] != self.nnz() {
            return false;
        }
        (0..self.nrows).all(|i| {
            let r = &self.indices[self.indptr[i]..self.indptr[i + 1]];
            self.indptr[i] <= self.indptr[i + 1]
                && r.windows(2).all(|w| w[0] < w[1])
                && r.iter().all(|&c| c < self.ncols)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 2.0)]).unwrap();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.get(0, 0), 3.0);
        assert!(a.check_invariants());
    }

    #[test]
    fn empty_triplets_give_zero_matrix() {
        let a = CsrMatrix::from_triplets(3, 3, &[]).unwrap();
        assert_eq!(a.nnz(), 0);
        assert_eq!(a.spmv(&[1.0, 2.0, 3.0]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn direct_placement() {
        let a = CsrMatrix::from_triplets(2, 3, &[(1, 2, 5.0), (0, 1, -1.0)]).unwrap();
        assert_eq!(a.row(0).collect::<Vec<_>>(), vec![(1, -1.0)]);
        assert_eq!(a.row(1).collect::<Vec<_>>(), vec![(2, 5.0)]);
    }

    #[test]
    fn out_of_range_is_rejected() {
        let e = CsrMatrix::from_triplets(2, 2, &[(2, 0, 1.0)]);
        assert!(matches!(e, Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn spmv_identity_and_zero() {
        let x = [1.0, -2.0, 3.5];
        assert_eq!(CsrMatrix::identity(3).spmv(&x).unwrap(), x.to_vec());
        assert_eq!(CsrMatrix::zeros(3, 3).spmv(&x).unwrap(), vec![0.0; 3]);
        assert!(CsrMatrix::identity(3).spmv(&[1.0]).is_err());
    }

    #[test]
    fn transpose_and_matmul() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 2.0, 0.0], vec![0.0, 3.0, 4.0]]).unwrap();
        let at = a.transpose();
        assert_eq!(
            at.to_dense(),
            vec![vec![1.0, 0.0], vec![2.0, 3.0], vec![0.0, 4.0]]
        );
        let p = a.matmul(&at).unwrap();
        assert_eq!(p.to_dense(), vec![vec![5.0, 6.0], vec![6.0, 25.0]]);
        assert!(at.check_invariants());
    }

    #[test]
    fn block_assembly_and_skew_defect() {
        let d = CsrMatrix::from_dense(&[vec![1.0, 2.0]]).unwrap();
        let dt = d.transpose().scale(-1.0);
        let j = CsrMatrix::block(
            &[1, 2],
            &[1, 2],
            &[vec![None, Some(&d)], vec![Some(&dt), None]],
        )
        .unwrap();
        assert_eq!(j.skew_defect(), 0.0);
        assert_eq!(j.get(2, 0), -2.0);
    }

    #[test]
    fn matrix_market_header() {
        let mut buf = Vec::new();
        CsrMatrix::identity(2)
            .write_matrix_market(&mut buf)
            .unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("%%MatrixMarket"));
        assert_eq!(s.lines().nth(1), Some("2 2 2"));
    }
}
