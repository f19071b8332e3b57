//! Compressed sparse row storage.

use super::SparseError;

/// A real sparse matrix in compressed sparse row form.
///
/// Column indices are strictly increasing within each row and no explicit
/// zeros are stored once a matrix has been built through [`CsrMatrix::from_triplets`]
/// or any of the arithmetic helpers.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from raw CSR arrays, validating the structural invariants.
    pub fn from_raw(
        nrows: usize,
        ncols: usize,
        indptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, SparseError> {
        if indptr.len() != nrows + 1 || indptr[0] != 0 {
            return Err(SparseError::InvalidStructure("row pointer length or origin".into()));
        }
        if indices.len() != values.len() || *indptr.last().unwrap() != indices.len() {
            return Err(SparseError::InvalidStructure("nnz mismatch".into()));
        }
        for i in 0..nrows {
            if indptr[i] > indptr[i + 1] {
                return Err(SparseError::InvalidStructure(format!("row pointer decreases at row {i}")));
            }
            let cols = &indices[indptr[i]..indptr[i + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(SparseError::InvalidStructure(format!(
                    "column indices not strictly increasing in row {i}"
                )));
            }
            if cols.last().is_some_and(|&c| c >= ncols) {
                return Err(SparseError::InvalidStructure(format!("column out of range in row {i}")));
            }
        }
        Ok(Self { nrows, ncols, indptr, indices, values })
    }

    /// Assembles from (row, col, value) triplets. Duplicates are summed and
    /// entries that end up exactly zero are dropped.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, SparseError> {
        let mut counts = vec![0usize; nrows + 1];
        for &(r, c, _) in triplets {
            if r >= nrows || c >= ncols {
                return Err(SparseError::IndexOutOfBounds { row: r, col: c, nrows, ncols });
            }
            counts[r + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(r, c, v) in triplets {
            cols[next[r]] = c;
            vals[next[r]] = v;
            next[r] += 1;
        }
        let mut builder = RowBuilder::with_capacity(nrows, ncols, triplets.len());
        let mut row: Vec<(usize, f64)> = Vec::new();
        for i in 0..nrows {
            row.clear();
            row.extend((counts[i]..counts[i + 1]).map(|k| (cols[k], vals[k])));
            builder.push_unsorted_row(&mut row);
        }
        Ok(builder.finish())
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let mut builder = RowBuilder::with_capacity(diag.len(), diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            builder.push_sorted_row([(i, d)]);
        }
        builder.finish()
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, indptr: vec![0; nrows + 1], indices: Vec::new(), values: Vec::new() }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[range.clone()], &self.values[range])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal_values(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.nrows).map(|i| self.row(i).1.iter().sum()).collect()
    }

    /// Iterates over stored entries as (row, col, value).
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    /// `w = A v`.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>, SparseError> {
        let mut w = vec![0.0; self.nrows];
        self.matvec_into(v, &mut w)?;
        Ok(w)
    }

    pub fn matvec_into(&self, v: &[f64], w: &mut [f64]) -> Result<(), SparseError> {
        if v.len() != self.ncols || w.len() != self.nrows {
            return Err(SparseError::DimensionMismatch {
                op: "matvec",
                left: (self.nrows, self.ncols),
                right: (v.len(), 1),
            });
        }
        for (i, out) in w.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *out = cols.iter().zip(vals).map(|(&j, &a)| a * v[j]).sum();
        }
        Ok(())
    }

    /// Sparse product `C = A B` (Gustavson's row-by-row accumulation).
    pub fn spmm(&self, other: &CsrMatrix) -> Result<CsrMatrix, SparseError> {
        if self.ncols != other.nrows {
            return Err(SparseError::DimensionMismatch {
                op: "spmm",
                left: (self.nrows, self.ncols),
                right: (other.nrows, other.ncols),
            });
        }
        let mut acc = vec![0.0; other.ncols];
        let mut marker = vec![usize::MAX; other.ncols];
        let mut touched: Vec<usize> = Vec::new();
        let mut builder = RowBuilder::with_capacity(self.nrows, other.ncols, self.nnz());
        for i in 0..self.nrows {
            touched.clear();
            let (acols, avals) = self.row(i);
            for (&k, &a) in acols.iter().zip(avals) {
                let (bcols, bvals) = other.row(k);
                for (&j, &b) in bcols.iter().zip(bvals) {
                    if marker[j] != i {
                        marker[j] = i;
                        acc[j] = 0.0;
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            builder.push_sorted_row(touched.iter().map(|&j| (j, acc[j])));
        }
        Ok(builder.finish())
    }

    /// `alpha A + beta B`, merging patterns.
    pub fn add_scaled(&self, alpha: f64, other: &CsrMatrix, beta: f64) -> Result<CsrMatrix, SparseError> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(SparseError::DimensionMismatch {
                op: "add",
                left: (self.nrows, self.ncols),
                right: (other.nrows, other.ncols),
            });
        }
        let mut builder = RowBuilder::with_capacity(self.nrows, self.ncols, self.nnz() + other.nnz());
        let mut merged: Vec<(usize, f64)> = Vec::new();
        for i in 0..self.nrows {
            merged.clear();
            let (ac, av) = self.row(i);
            let (bc, bv) = other.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ac.len() || q < bc.len() {
                if q == bc.len() || (p < ac.len() && ac[p] < bc[q]) {
                    merged.push((ac[p], alpha * av[p]));
                    p += 1;
                } else if p == ac.len() || bc[q] < ac[p] {
                    merged.push((bc[q], beta * bv[q]));
                    q += 1;
                } else {
                    merged.push((ac[p], alpha * av[p] + beta * bv[q]));
                    p += 1;
                    q += 1;
                }
            }
            builder.push_sorted_row(merged.iter().copied());
        }
        Ok(builder.finish())
    }

    /// Keeps the first `n` rows.
    pub fn top_rows(&self, n: usize) -> CsrMatrix {
        let n = n.min(self.nrows);
        let end = self.indptr[n];
        CsrMatrix {
            nrows: n,
            ncols: self.ncols,
            indptr: self.indptr[..=n].to_vec(),
            indices: self.indices[..end].to_vec(),
            values: self.values[..end].to_vec(),
        }
    }

    /// Principal submatrix on the given (sorted, unique) index list.
    pub fn principal_submatrix(&self, keep: &[usize]) -> CsrMatrix {
        let mut local = vec![usize::MAX; self.ncols];
        for (k, &g) in keep.iter().enumerate() {
            local[g] = k;
        }
        let mut builder = RowBuilder::with_capacity(keep.len(), keep.len(), 0);
        let mut row: Vec<(usize, f64)> = Vec::new();
        for &g in keep {
            row.clear();
            let (cols, vals) = self.row(g);
            row.extend(
                cols.iter()
                    .zip(vals)
                    .filter(|(&j, _)| local[j] != usize::MAX)
                    .map(|(&j, &v)| (local[j], v)),
            );
            builder.push_unsorted_row(&mut row);
        }
        builder.finish()
    }

    /// `P A P^T` where row/column `perm[k]` of `A` becomes row/column `k`.
    pub fn permute_symmetric(&self, perm: &[usize]) -> CsrMatrix {
        let mut inv = vec![0usize; perm.len()];
        for (k, &p) in perm.iter().enumerate() {
            inv[p] = k;
        }
        let mut builder = RowBuilder::with_capacity(self.nrows, self.ncols, self.nnz());
        let mut row: Vec<(usize, f64)> = Vec::new();
        for &p in perm {
            row.clear();
            let (cols, vals) = self.row(p);
            row.extend(cols.iter().zip(vals).map(|(&j, &v)| (inv[j], v)));
            builder.push_unsorted_row(&mut row);
        }
        builder.finish()
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut t: Vec<(usize, usize, f64)> = self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        t.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut builder = RowBuilder::with_capacity(self.ncols, self.nrows, t.len());
        let mut start = 0;
        for i in 0..self.ncols {
            let mut end = start;
            while end < t.len() && t[end].0 == i {
                end += 1;
            }
            builder.push_sorted_row(t[start..end].iter().map(|&(_, j, v)| (j, v)));
            start = end;
        }
        builder.finish()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, j, v) in self.triplets() {
            d[i][j] = v;
        }
        d
    }
}

/// Incremental row-by-row CSR construction.
pub(crate) struct RowBuilder {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl RowBuilder {
    pub(crate) fn with_capacity(nrows: usize, ncols: usize, nnz: usize) -> Self {
        let mut indptr = Vec::with_capacity(nrows + 1);
        indptr.push(0);
        Self { nrows, ncols, indptr, indices: Vec::with_capacity(nnz), values: Vec::with_capacity(nnz) }
    }

    /// Entries must arrive with strictly increasing columns.
    pub(crate) fn push_sorted_row(&mut self, entries: impl IntoIterator<Item = (usize, f64)>) {
        for (j, v) in entries {
            if v != 0.0 {
                self.indices.push(j);
                self.values.push(v);
            }
        }
        self.indptr.push(self.indices.len());
    }

    /// Sorts by column and sums duplicates.
    pub(crate) fn push_unsorted_row(&mut self, entries: &mut [(usize, f64)]) {
        entries.sort_unstable_by_key(|e| e.0);
        let mut k = 0;
        while k < entries.len() {
            let j = entries[k].0;
            let mut v = 0.0;
            while k < entries.len() && entries[k].0 == j {
                v += entries[k].1;
                k += 1;
            }
            if v != 0.0 {
                self.indices.push(j);
                self.values.push(v);
            }
        }
        self.indptr.push(self.indices.len());
    }

    pub(crate) fn finish(self) -> CsrMatrix {
        debug_assert_eq!(self.indptr.len(), self.nrows + 1);
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            indptr: self.indptr,
            indices: self.indices,
            values: self.values,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let (n, m, k) = (a.len(), b[0].len(), b.len());
        let mut c = vec![vec![0.0; m]; n];
        for i in 0..n {
            for l in 0..k {
                for j in 0..m {
                    c[i][j] += a[i][l] * b[l][j];
                }
            }
        }
        c
    }

    fn random_sparse(n: usize, m: usize, fill: f64, seed: u64) -> CsrMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..m {
                if rng.gen::<f64>() < fill {
                    t.push((i, j, rng.gen_range(-1.0..1.0)));
                }
            }
        }
        CsrMatrix::from_triplets(n, m, &t).unwrap()
    }

    #[test]
    fn triplets_merge_duplicates_and_drop_zeros() {
        let a = CsrMatrix::from_triplets(2, 3, &[(0, 2, 1.0), (0, 0, 2.0), (0, 2, 3.0), (1, 1, 1.0), (1, 1, -1.0)])
            .unwrap();
        assert_eq!(a.row(0), (&[0usize, 2][..], &[2.0, 4.0][..]));
        assert_eq!(a.row(1).0.len(), 0);
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn out_of_range_triplet_is_rejected() {
        assert!(CsrMatrix::from_triplets(2, 2, &[(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn identity_and_zero_matvec() {
        let v = vec![1.5, -2.0, 3.25];
        assert_eq!(CsrMatrix::identity(3).matvec(&v).unwrap(), v);
        assert_eq!(CsrMatrix::zeros(3, 3).matvec(&v).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn matvec_dimension_mismatch() {
        assert!(matches!(
            CsrMatrix::identity(3).matvec(&[1.0, 2.0]),
            Err(SparseError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn matvec_matches_dense() {
        let a = random_sparse(50, 50, 0.1, 7);
        let d = a.to_dense();
        let v: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin()).collect();
        let w = a.matvec(&v).unwrap();
        for i in 0..50 {
            let expect: f64 = (0..50).map(|j| d[i][j] * v[j]).sum();
            assert!((w[i] - expect).abs() <= 1e-13, "row {i}");
        }
    }

    #[test]
    fn spmm_identities_and_dense_oracle() {
        let a = random_sparse(30, 20, 0.15, 1);
        let b = random_sparse(20, 25, 0.15, 2);
        assert_eq!(a.spmm(&CsrMatrix::identity(20)).unwrap(), a);
        assert_eq!(CsrMatrix::identity(30).spmm(&a).unwrap(), a);
        let c = a.spmm(&b).unwrap().to_dense();
        let expect = dense_mul(&a.to_dense(), &b.to_dense());
        for i in 0..30 {
            for j in 0..25 {
                assert!((c[i][j] - expect[i][j]).abs() <= 1e-13);
            }
        }
        assert!(b.spmm(&b).is_err());
    }

    #[test]
    fn add_scaled_and_transpose() {
        let a = random_sparse(10, 10, 0.3, 3);
        let b = random_sparse(10, 10, 0.3, 4);
        let c = a.add_scaled(2.0, &b, -0.5).unwrap().to_dense();
        let (da, db) = (a.to_dense(), b.to_dense());
        for i in 0..10 {
            for j in 0..10 {
                assert!((c[i][j] - (2.0 * da[i][j] - 0.5 * db[i][j])).abs() < 1e-15);
            }
        }
        assert_eq!(a.transpose().transpose(), a);
        assert_eq!(a.transpose().get(3, 5), a.get(5, 3));
    }

    #[test]
    fn submatrix_and_permutation() {
        let a = random_sparse(8, 8, 0.5, 5);
        let keep = [1, 4, 6];
        let s = a.principal_submatrix(&keep);
        for (li, &gi) in keep.iter().enumerate() {
            for (lj, &gj) in keep.iter().enumerate() {
                assert_eq!(s.get(li, lj), a.get(gi, gj));
            }
        }
        let perm = [3, 0, 7, 1, 6, 2, 5, 4];
        let p = a.permute_symmetric(&perm);
        for k in 0..8 {
            for l in 0..8 {
                assert_eq!(p.get(k, l), a.get(perm[k], perm[l]));
            }
        }
    }

    #[test]
    fn from_raw_rejects_unsorted_columns() {
        assert!(CsrMatrix::from_raw(1, 3, vec![0, 2], vec![2, 1], vec![1.0, 1.0]).is_err());
        assert!(CsrMatrix::from_raw(1, 3, vec![0, 2], vec![1, 2], vec![1.0, 1.0]).is_ok());
    }
}
