//! Reverse Cuthill–McKee ordering and envelope (skyline) Cholesky.

use std::collections::VecDeque;

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

fn bfs_levels(adj: &[&[usize]], start: usize, seen: &mut [bool], order: &mut Vec<usize>, degree: &[usize]) -> usize {
    let mut q = VecDeque::from([start]);
    seen[start] = true;
    let mut last = start;
    while let Some(v) = q.pop_front() {
        order.push(v);
        last = v;
        let mut next: Vec<usize> = adj[v].iter().copied().filter(|&u| !seen[u]).collect();
        next.sort_by_key(|&u| (degree[u], u));
        for u in next {
            seen[u] = true;
            q.push_back(u);
        }
    }
    last
}

/// Reverse Cuthill–McKee permutation: `perm[new] = old`.
pub fn rcm_order(adj: &[&[usize]]) -> Vec<usize> {
    let n = adj.len();
    let degree: Vec<usize> = adj.iter().map(|r| r.len()).collect();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let root = (0..n)
            .filter(|&v| !seen[v])
            .min_by_key(|&v| (degree[v], v))
            .unwrap();
        // A couple of BFS sweeps to find a pseudo-peripheral start node.
        let mut start = root;
        for _ in 0..3 {
            let mut scratch = seen.clone();
            let mut tmp = Vec::new();
            let far = bfs_levels(adj, start, &mut scratch, &mut tmp, &degree);
            if far == start {
                break;
            }
            start = far;
        }
        bfs_levels(adj, start, &mut seen, &mut order, &degree);
    }
    order.reverse();
    order
}

/// Lower-triangular Cholesky factor stored by rows from the first nonzero
/// column to the diagonal, in a permuted ordering.
#[derive(Clone, Debug)]
pub struct EnvelopeCholesky<T> {
    perm: Vec<usize>,
    first: Vec<usize>,
    offset: Vec<usize>,
    data: Vec<T>,
}

impl<T: Real> EnvelopeCholesky<T> {
    /// Factors a symmetric positive definite matrix.
    pub fn factor(a: &CsrMatrix<T>) -> Result<Self> {
        let n = a.dim();
        let pattern = a.pattern();
        let perm = rcm_order(&pattern);
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first = vec![0usize; n];
        for (i, f) in first.iter_mut().enumerate() {
            let old = perm[i];
            *f = pattern[old].iter().map(|&c| inv[c]).filter(|&c| c <= i).min().unwrap_or(i);
        }
        let mut offset = Vec::with_capacity(n + 1);
        offset.push(0);
        for i in 0..n {
            offset.push(offset[i] + i - first[i] + 1);
        }
        let mut data = vec![T::zero(); offset[n]];
        for i in 0..n {
            let (cols, vals) = a.row(perm[i]);
            for (&c, &v) in cols.iter().zip(vals) {
                let j = inv[c];
                if j <= i {
                    data[offset[i] + j - first[i]] = v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            let row_i = offset[i];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let mut s = data[row_i + j - fi];
                let (ri, rj) = (&data[row_i + k0 - fi..row_i + j - fi], &data[offset[j] + k0 - fj..offset[j] + j - fj]);
                for (&x, &y) in ri.iter().zip(rj) {
                    s -= x * y;
                }
                let djj = data[offset[j + 1] - 1];
                data[row_i + j - fi] = s / djj;
            }
            let mut d = data[row_i + i - fi];
            for &x in &data[row_i..row_i + i - fi] {
                d -= x * x;
            }
            if !(d > T::zero()) {
                return Err(Error::NotPositiveDefinite {
                    row: perm[i],
                    pivot: d.to_f64_lossy(),
                });
            }
            data[row_i + i - fi] = d.sqrt();
        }
        Ok(Self {
            perm,
            first,
            offset,
            data,
        })
    }

    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.perm.len();
        let mut y: Vec<T> = self.perm.iter().map(|&o| b[o]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.offset[i]..self.offset[i + 1]];
            let mut s = y[i];
            for (k, &l) in row[..i - fi].iter().enumerate() {
                s -= l * y[fi + k];
            }
            y[i] = s / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.offset[i]..self.offset[i + 1]];
            let xi = y[i] / row[i - fi];
            y[i] = xi;
            for (k, &l) in row[..i - fi].iter().enumerate() {
                y[fi + k] -= l * xi;
            }
        }
        let mut x = vec![T::zero(); n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> CsrMatrix<f64> {
        let rows: Vec<Vec<usize>> = (0..n)
            .map(|i| (i.saturating_sub(1)..=(i + 1).min(n - 1)).collect())
            .collect();
        let mut a = CsrMatrix::with_pattern(&rows);
        for i in 0..n {
            a.add(i, i, 2.5);
            if i + 1 < n {
                a.add(i, i + 1, -1.0);
                a.add(i + 1, i, -1.0);
            }
        }
        a
    }

    #[test]
    fn solves_tridiagonal() {
        let a = laplacian_1d(50);
        let x: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin()).collect();
        let b = a.mul_vec(&x);
        let f = EnvelopeCholesky::factor(&a).unwrap();
        let y = f.solve(&b);
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-12);
        }
        assert!(f.envelope_size() <= 2 * 50);
    }

    #[test]
    fn rejects_indefinite() {
        let mut a = laplacian_1d(5);
        a.add(2, 2, -10.0);
        assert!(matches!(EnvelopeCholesky::factor(&a), Err(Error::NotPositiveDefinite { .. })));
    }
}
