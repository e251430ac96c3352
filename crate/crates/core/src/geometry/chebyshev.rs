//! Inradius and incenter as a linear program.
//!
//! The Chebyshev center maximizes `r` subject to `n_i · (p − a_i) ≥ r` for
//! every edge (inward unit normal `n_i`, point `a_i` on the edge). Shifting
//! the origin to the vertex centroid makes the slack basis feasible, so a
//! single simplex phase suffices.

use super::domain::ConvexDomain;
use crate::error::{Error, Result};
use crate::point::Point2;
use crate::scalar::Real;

/// Dense tableau for `max cᵀz s.t. Az ≤ b, z ≥ 0` with `b ≥ 0`.
struct Tableau<T> {
    rows: usize,
    cols: usize,
    // (rows + 1) × (cols + 1); the last row is the objective, the last column the rhs.
    data: Vec<T>,
    basis: Vec<usize>,
}

impl<T: Real> Tableau<T> {
    fn new(a: &[Vec<T>], b: &[T], c: &[T]) -> Self {
        let rows = a.len();
        let nvar = c.len();
        let cols = nvar + rows;
        let w = cols + 1;
        let mut data = vec![T::zero(); (rows + 1) * w];
        for (i, row) in a.iter().enumerate() {
            data[i * w..i * w + nvar].copy_from_slice(row);
            data[i * w + nvar + i] = T::one();
            data[i * w + cols] = b[i];
        }
        for (j, &cj) in c.iter().enumerate() {
            data[rows * w + j] = -cj;
        }
        Self {
            rows,
            cols,
            data,
            basis: (nvar..nvar + rows).collect(),
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> T {
        self.data[i * (self.cols + 1) + j]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.cols + 1;
        let inv = T::one() / self.at(r, c);
        for j in 0..w {
            self.data[r * w + j] *= inv;
        }
        for i in 0..=self.rows {
            if i == r {
                continue;
            }
            let f = self.data[i * w + c];
            if f != T::zero() {
                for j in 0..w {
                    let v = self.data[r * w + j];
                    self.data[i * w + j] -= f * v;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Dantzig pricing, switching to Bland's rule after a run of degenerate
    /// pivots so that cycling cannot occur.
    fn solve(&mut self, eps: T) -> Result<()> {
        let mut degenerate_run = 0usize;
        let max_pivots = 50 * (self.rows + self.cols);
        for _ in 0..max_pivots {
            let bland = degenerate_run > self.rows;
            let mut enter = None;
            let mut best = -eps;
            for j in 0..self.cols {
                let rc = self.at(self.rows, j);
                if rc < -eps {
                    if bland {
                        enter = Some(j);
                        break;
                    }
                    if rc < best {
                        best = rc;
                        enter = Some(j);
                    }
                }
            }
            let Some(c) = enter else { return Ok(()) };
            let mut leave: Option<(usize, T)> = None;
            for i in 0..self.rows {
                let a = self.at(i, c);
                if a > eps {
                    let ratio = self.at(i, self.cols) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((k, r)) if ratio < r || (ratio == r && self.basis[i] < self.basis[k]) => {
                            Some((i, ratio))
                        }
                        keep => keep,
                    };
                }
            }
            let Some((r, ratio)) = leave else {
                return Err(Error::Infeasible("objective unbounded".into()));
            };
            degenerate_run = if ratio <= eps { degenerate_run + 1 } else { 0 };
            self.pivot(r, c);
        }
        Err(Error::Infeasible("simplex pivot limit reached".into()))
    }

    fn value(&self, var: usize) -> T {
        self.basis
            .iter()
            .position(|&b| b == var)
            .map_or(T::zero(), |i| self.at(i, self.cols))
    }
}

/// Chebyshev center of the polygon: returns `(inradius, incenter)`.
///
/// The returned radius is the minimum edge distance re-evaluated at the LP
/// optimum, so it is consistent with [`ConvexDomain::distance_to_boundary`].
pub fn inradius_incenter<T: Real>(d: &ConvexDomain<T>) -> Result<(T, Point2<T>)> {
    let n = d.len();
    let v = d.vertices();
    let inv_n = T::one() / T::from_usize_lossy(n);
    let origin = v.iter().fold(Point2::zero(), |s, &p| s + p) * inv_n;
    let scale = d
        .vertices()
        .iter()
        .map(|p| p.dist(origin))
        .fold(T::zero(), T::max);

    // Variables: qx+, qx-, qy+, qy-, r (all ≥ 0); p = origin + scale·q.
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for i in 0..n {
        let (p0, p1) = d.edge(i);
        let e = p1 - p0;
        let nrm = e.perp() * (T::one() / e.norm());
        let rhs = nrm.dot(origin - p0) / scale;
        if !(rhs > T::zero()) {
            return Err(Error::Infeasible(format!(
                "vertex centroid not strictly inside edge {i}"
            )));
        }
        a.push(vec![-nrm.x, nrm.x, -nrm.y, nrm.y, T::one()]);
        b.push(rhs);
    }
    let c = [T::zero(), T::zero(), T::zero(), T::zero(), T::one()];
    let mut tab = Tableau::new(&a, &b, &c);
    tab.solve(T::epsilon() * T::lit(1e3))?;
    let q = Point2::new(tab.value(0) - tab.value(1), tab.value(2) - tab.value(3));
    let center = origin + q * scale;
    let r_lp = tab.value(4) * scale;
    let r = d.distance_to_boundary(center);
    if !(r > T::zero()) || (r - r_lp).abs() > T::lit(1e-6) * scale.max(T::one()) {
        return Err(Error::Infeasible(format!(
            "inconsistent optimum (lp {r_lp}, recomputed {r})"
        )));
    }
    Ok((r, center))
}
