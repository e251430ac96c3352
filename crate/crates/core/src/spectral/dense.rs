use crate::scalar::Real;

/// Cyclic Jacobi eigen-decomposition of a small symmetric matrix (row-major
/// `n × n`). Returns eigenvalues ascending and eigenvectors as columns of the
/// returned row-major matrix.
pub fn symmetric_eigen<T: Real>(a: &[T], n: usize) -> (Vec<T>, Vec<T>) {
    let mut a = a.to_vec();
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let scale = a.iter().fold(T::zero(), |m, x| m.max(x.abs())).max(T::min_positive_value());
    for _sweep in 0..100 {
        let mut off = T::zero();
        for i in 0..n {
            for j in i + 1..n {
                off += a[i * n + j] * a[i * n + j];
            }
        }
        if off.sqrt() <= T::epsilon() * scale * T::lit(1e-2) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[i * n + i].partial_cmp(&a[j * n + j]).unwrap());
    let vals = idx.iter().map(|&i| a[i * n + i]).collect();
    let mut vecs = vec![T::zero(); n * n];
    for (new, &old) in idx.iter().enumerate() {
        for k in 0..n {
            vecs[k * n + new] = v[k * n + old];
        }
    }
    (vals, vecs)
}
