use crate::scalar::Real;

/// Compressed sparse row matrix with sorted column indices.
#[derive(Clone, Debug)]
pub struct CsrMatrix<T> {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    /// Zero matrix with the given sparsity pattern (each row sorted).
    pub fn with_pattern(rows: &[Vec<usize>]) -> Self {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        for r in rows {
            debug_assert!(r.windows(2).all(|w| w[0] < w[1]));
            indices.extend_from_slice(r);
            indptr.push(indices.len());
        }
        let nnz = indices.len();
        Self {
            n: rows.len(),
            indptr,
            indices,
            data: vec![T::zero(); nnz],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let r = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[r.clone()], &self.data[r])
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (cols, _) = self.row(i);
        cols.binary_search(&j).ok().map(|k| self.indptr[i] + k)
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.slot(i, j).map_or(T::zero(), |k| self.data[k])
    }

    /// Adds `v` at `(i, j)`; panics if the entry is outside the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        let k = self.slot(i, j).expect("entry outside sparsity pattern");
        self.data[k] += v;
    }

    pub fn mul_vec_into(&self, x: &[T], y: &mut [T]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut s = T::zero();
            for k in self.indptr[i]..self.indptr[i + 1] {
                s += self.data[k] * x[self.indices[k]];
            }
            *yi = s;
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `xᵀ A y`.
    pub fn form(&self, x: &[T], y: &[T]) -> T {
        let mut s = T::zero();
        for i in 0..self.n {
            let mut r = T::zero();
            for k in self.indptr[i]..self.indptr[i + 1] {
                r += self.data[k] * y[self.indices[k]];
            }
            s += x[i] * r;
        }
        s
    }

    /// `self + alpha · other`; both must share the same pattern.
    pub fn add_scaled(&self, alpha: T, other: &Self) -> Self {
        assert_eq!(self.indices, other.indices, "patterns differ");
        let mut out = self.clone();
        for (a, &b) in out.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
        out
    }

    pub fn row_sum(&self, i: usize) -> T {
        self.row(i).1.iter().copied().sum()
    }

    pub fn total_sum(&self) -> T {
        self.data.iter().copied().sum()
    }

    pub fn max_asymmetry(&self) -> T {
        let mut m = T::zero();
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                m = m.max((v - self.get(j, i)).abs());
            }
        }
        m
    }

    /// Column lists of every row (the sparsity graph including the diagonal).
    pub fn pattern(&self) -> Vec<&[usize]> {
        (0..self.n).map(|i| self.row(i).0).collect()
    }
}
