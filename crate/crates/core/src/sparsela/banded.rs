//! Banded LU factorization with partial pivoting under a bandwidth-reducing
//! ordering.
//!
//! Systems arising on a tube around a curve are essentially one-dimensional:
//! after a reverse Cuthill-McKee ordering the bandwidth is set by the tube
//! cross-section, so a dense-band factorization is cheap and can be reused for
//! any number of right-hand sides.

use super::{CsrMatrix, SparseError};
use std::collections::VecDeque;

/// Reverse Cuthill-McKee ordering of the symmetrized pattern of `a`.
///
/// Returns `perm` such that new index `k` corresponds to old index `perm[k]`.
/// Each connected component is started from a pseudo-peripheral vertex.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let adj = symmetric_adjacency(a);
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    let mut nbrs: Vec<usize> = Vec::new();
    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(&adj, seed);
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            nbrs.clear();
            nbrs.extend(adj[v].iter().copied().filter(|&w| !visited[w]));
            nbrs.sort_by_key(|&w| (degree[w], w));
            for &w in &nbrs {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn symmetric_adjacency(a: &CsrMatrix) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, j, _) in a.triplets() {
        if i != j && j < n {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

/// Breadth-first level structure rooted at `root`: (eccentricity, last level).
fn level_structure(adj: &[Vec<usize>], root: usize, mark: &mut [usize], stamp: usize) -> (usize, Vec<usize>) {
    let mut frontier = vec![root];
    mark[root] = stamp;
    let mut depth = 0;
    loop {
        let mut next = Vec::new();
        for &v in &frontier {
            for &w in &adj[v] {
                if mark[w] != stamp {
                    mark[w] = stamp;
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            return (depth, frontier);
        }
        depth += 1;
        frontier = next;
    }
}

fn pseudo_peripheral(adj: &[Vec<usize>], seed: usize) -> usize {
    let mut mark = vec![usize::MAX; adj.len()];
    let mut root = seed;
    let (mut ecc, mut last) = level_structure(adj, root, &mut mark, 0);
    for stamp in 1..8 {
        let candidate = *last.iter().min_by_key(|&&v| (adj[v].len(), v)).expect("non-empty level");
        let (e, l) = level_structure(adj, candidate, &mut mark, stamp);
        if e <= ecc {
            break;
        }
        root = candidate;
        ecc = e;
        last = l;
    }
    root
}

/// Lower and upper bandwidth of `a`.
pub fn bandwidths(a: &CsrMatrix) -> (usize, usize) {
    let (mut kl, mut ku) = (0, 0);
    for (i, j, _) in a.triplets() {
        if j < i {
            kl = kl.max(i - j);
        } else {
            ku = ku.max(j - i);
        }
    }
    (kl, ku)
}

/// LU factors `P A Q = L U` stored in dense band form.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    /// Row stride: row `i` holds columns `i - kl ..= i + kl + ku`.
    width: usize,
    data: Vec<f64>,
    pivots: Vec<usize>,
    /// New index `k` is original index `perm[k]`.
    perm: Vec<usize>,
}

impl BandLu {
    /// Factors `a` after a reverse Cuthill-McKee reordering.
    pub fn factor(a: &CsrMatrix) -> Result<Self, SparseError> {
        let perm = reverse_cuthill_mckee(a);
        Self::factor_with_ordering(a, perm)
    }

    /// Factors `a` under a caller-supplied symmetric ordering.
    pub fn factor_with_ordering(a: &CsrMatrix, perm: Vec<usize>) -> Result<Self, SparseError> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(SparseError::NotSquare { nrows: n, ncols: a.ncols() });
        }
        if perm.len() != n {
            return Err(SparseError::DimensionMismatch { op: "ordering", left: (n, n), right: (perm.len(), 1) });
        }
        let pa = a.permute_symmetric(&perm);
        let (kl, ku) = bandwidths(&pa);
        let width = 2 * kl + ku + 1;
        let mut data = vec![0.0; n * width];
        for (i, j, v) in pa.triplets() {
            data[i * width + (j + kl - i)] = v;
        }
        let mut lu = Self { n, kl, ku, width, data, pivots: vec![0; n], perm };
        lu.eliminate()?;
        Ok(lu)
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        // valid for i - kl <= j <= i + kl + ku
        i * self.width + (j + self.kl - i)
    }

    fn eliminate(&mut self) -> Result<(), SparseError> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut piv = k;
            let mut best = self.data[self.at(k, k)].abs();
            for i in k + 1..=last_row {
                let v = self.data[self.at(i, k)].abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best == 0.0 || best <= f64::EPSILON * scale * 1e-6 {
                return Err(SparseError::Singular { pivot: k });
            }
            self.pivots[k] = piv;
            let last_col = (k + kl + ku).min(n - 1);
            let len = last_col - k + 1;
            if piv != k {
                let (a, b) = (self.at(k, k), self.at(piv, k));
                for t in 0..len {
                    self.data.swap(a + t, b + t);
                }
            }
            let pivot_row_start = self.at(k, k);
            let inv = 1.0 / self.data[pivot_row_start];
            for i in k + 1..=last_row {
                let lik = self.at(i, k);
                let m = self.data[lik] * inv;
                self.data[lik] = m;
                if m == 0.0 {
                    continue;
                }
                // rows are disjoint slices of the same buffer
                let (head, tail) = self.data.split_at_mut(lik);
                let pivot = &head[pivot_row_start + 1..pivot_row_start + len];
                let target = &mut tail[1..len];
                for (t, p) in target.iter_mut().zip(pivot) {
                    *t -= m * p;
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    /// Bytes held by the factor storage.
    pub fn storage_bytes(&self) -> usize {
        self.data.len() * std::mem::size_of::<f64>()
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, SparseError> {
        let mut x = vec![0.0; self.n];
        self.solve_into(b, &mut x)?;
        Ok(x)
    }

    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) -> Result<(), SparseError> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        if b.len() != n || x.len() != n {
            return Err(SparseError::DimensionMismatch { op: "band solve", left: (n, n), right: (b.len(), 1) });
        }
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for k in 0..n {
            let piv = self.pivots[k];
            if piv != k {
                y.swap(k, piv);
            }
            let yk = y[k];
            if yk != 0.0 {
                for i in k + 1..=(k + kl).min(n - 1) {
                    y[i] -= self.data[self.at(i, k)] * yk;
                }
            }
        }
        for k in (0..n).rev() {
            let last_col = (k + kl + ku).min(n - 1);
            let start = self.at(k, k);
            let row = &self.data[start..start + (last_col - k + 1)];
            let s: f64 = row[1..].iter().zip(&y[k + 1..=last_col]).map(|(a, y)| a * y).sum();
            y[k] = (y[k] - s) / row[0];
        }
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k];
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
            a.swap(k, p);
            b.swap(k, p);
            for i in k + 1..n {
                let m = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= m * a[k][j];
                }
                b[i] -= m * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
            x[k] = (b[k] - s) / a[k][k];
        }
        x
    }

    fn periodic_helmholtz(n: usize, c: f64) -> CsrMatrix {
        let h = 1.0 / n as f64;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, c + 2.0 / (h * h)));
            t.push((i, (i + n - 1) % n, -1.0 / (h * h)));
            t.push((i, (i + 1) % n, -1.0 / (h * h)));
        }
        CsrMatrix::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn rcm_is_a_permutation_with_small_band_on_a_ring() {
        let a = periodic_helmholtz(100, 1.0);
        let perm = reverse_cuthill_mckee(&a);
        let mut seen = perm.clone();
        seen.sort_unstable();
        assert_eq!(seen, (0..100).collect::<Vec<_>>());
        let (kl, ku) = bandwidths(&a.permute_symmetric(&perm));
        assert!(kl <= 2 && ku <= 2, "ring bandwidth ({kl},{ku})");
    }

    #[test]
    fn band_solve_matches_dense_on_nonsymmetric_system() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 60;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, rng.gen_range(-0.5..0.5)));
            for off in 1..4 {
                if i + off < n {
                    t.push((i, i + off, rng.gen_range(-1.0..1.0)));
                    t.push((i + off, i, rng.gen_range(-1.0..1.0)));
                }
            }
        }
        let a = CsrMatrix::from_triplets(n, n, &t).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let x = BandLu::factor(&a).unwrap().solve(&b).unwrap();
        let expect = dense_solve(a.to_dense(), b.clone());
        for (x, e) in x.iter().zip(&expect) {
            assert!((x - e).abs() <= 1e-9 * e.abs().max(1.0), "{x} vs {e}");
        }
        let r = a.matvec(&x).unwrap();
        let res: f64 = r.iter().zip(&b).map(|(r, b)| (r - b).powi(2)).sum::<f64>().sqrt();
        assert!(res < 1e-11);
    }

    #[test]
    fn pivoting_handles_zero_leading_diagonal() {
        let a = CsrMatrix::from_triplets(3, 3, &[(0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0), (2, 2, 3.0), (1, 2, 1.0)])
            .unwrap();
        let x = BandLu::factor_with_ordering(&a, vec![0, 1, 2]).unwrap().solve(&[1.0, 3.0, 3.0]).unwrap();
        // x1 = 1, x0 + x1 + x2 = 3, 3 x2 = 3 -> x = (1, 1, 1)
        for v in x {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]).unwrap();
        assert!(matches!(BandLu::factor(&a), Err(SparseError::Singular { .. })));
    }
}
