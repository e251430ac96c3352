//! First nontrivial eigenpair of the generalized problem `K φ = μ M φ`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::assemble::assemble;
use super::dense::symmetric_eigen;
use super::envelope::EnvelopeCholesky;
use super::sparse::CsrMatrix;
use crate::error::{invalid, Error, Result};
use crate::mesh::TriMesh;
use crate::point::Point2;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    /// The global maximum lies to the right of the global minimum.
    MaxOnRight,
}

/// `(μ₁, φ₁)` on a mesh, with `φ₁` normalized in `L²` and orthogonal to constants.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenPair<T> {
    pub mu1: T,
    pub mu2: T,
    pub phi: Vec<T>,
    pub sign_convention: SignConvention,
    /// `‖Kφ − μ₁Mφ‖ / ‖Mφ‖`.
    pub residual: T,
    /// Set when `(μ₂ − μ₁)/μ₁ < 1e-3`.
    pub multiplicity_flag: bool,
    pub iterations: usize,
}

pub const MULTIPLICITY_REL_GAP: f64 = 1e-3;

/// Subspace iteration settings.
#[derive(Clone, Copy, Debug)]
pub struct EigenOptions {
    pub block: usize,
    pub max_iterations: usize,
    /// Seed of the start block; fixes the representative of a degenerate pair.
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            block: 8,
            max_iterations: 400,
            seed: 0x6e65_756d_616e_6e31,
        }
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Removes the `M`-projection onto constants: `x ← x − (1ᵀMx / 1ᵀM1)·1`.
fn deflate_constants<T: Real>(x: &mut [T], m_ones: &[T], mass_total: T) {
    let c = dot(m_ones, x) / mass_total;
    for v in x.iter_mut() {
        *v -= c;
    }
}

/// `M`-orthonormalizes the columns in place (classical Gram–Schmidt, twice).
/// Columns that collapse are replaced from `rng`.
fn m_orthonormalize<T: Real>(m: &CsrMatrix<T>, xs: &mut [Vec<T>], m_ones: &[T], mass_total: T, rng: &mut ChaCha8Rng) {
    let mut mx: Vec<Vec<T>> = Vec::with_capacity(xs.len());
    for j in 0..xs.len() {
        for attempt in 0..3 {
            let before = m.form(&xs[j], &xs[j]).sqrt();
            for _ in 0..2 {
                for (i, mxi) in mx.iter().enumerate() {
                    let c = dot(mxi, &xs[j]);
                    let (head, tail) = xs.split_at_mut(j);
                    axpy(-c, &head[i], &mut tail[0]);
                }
                deflate_constants(&mut xs[j], m_ones, mass_total);
            }
            let v = m.mul_vec(&xs[j]);
            let nrm = dot(&v, &xs[j]).sqrt();
            if nrm > before * T::lit(1e-8) && nrm > T::zero() || attempt == 2 {
                let inv = T::one() / nrm;
                xs[j].iter_mut().for_each(|x| *x *= inv);
                mx.push(v.into_iter().map(|x| x * inv).collect());
                break;
            }
            xs[j] = (0..xs[j].len()).map(|_| T::lit(rng.random::<f64>() - 0.5)).collect();
        }
    }
}

/// Smallest nonzero eigenvalue `μ₁`, the next one `μ₂`, and the `M`-normalized
/// eigenvector, by shift-invert block subspace iteration with explicit
/// deflation of constants. The sign is fixed so that the maximum lies to the
/// right of the minimum (see [`apply_sign_convention`]).
pub fn solve_first_eigenpair<T: Real>(
    k: &CsrMatrix<T>,
    m: &CsrMatrix<T>,
    nodes: &[Point2<T>],
    tol: T,
) -> Result<EigenPair<T>> {
    solve_first_eigenpair_with(k, m, nodes, tol, &EigenOptions::default())
}

pub fn solve_first_eigenpair_with<T: Real>(
    k: &CsrMatrix<T>,
    m: &CsrMatrix<T>,
    nodes: &[Point2<T>],
    tol: T,
    opts: &EigenOptions,
) -> Result<EigenPair<T>> {
    let n = k.dim();
    if !(tol >= T::lit(1e-12)) {
        return Err(invalid("tol", "must be at least 1e-12"));
    }
    if n < 4 || nodes.len() != n {
        return Err(invalid("mesh", "need at least 4 nodes with coordinates"));
    }
    let p = opts.block.clamp(2, n - 1);

    // Shift of order the expected μ₁ keeps the factor well conditioned.
    let (mut lo, mut hi) = (nodes[0], nodes[0]);
    for q in nodes {
        lo = Point2::new(lo.x.min(q.x), lo.y.min(q.y));
        hi = Point2::new(hi.x.max(q.x), hi.y.max(q.y));
    }
    let span = lo.dist(hi);
    let sigma = T::lit(0.5) * T::PI() * T::PI() / (span * span);
    let chol = EnvelopeCholesky::factor(&k.add_scaled(sigma, m))?;

    let ones = vec![T::one(); n];
    let m_ones = m.mul_vec(&ones);
    let mass_total: T = m_ones.iter().copied().sum();

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut xs: Vec<Vec<T>> = (0..p)
        .map(|_| (0..n).map(|_| T::lit(rng.random::<f64>() - 0.5)).collect())
        .collect();
    m_orthonormalize(m, &mut xs, &m_ones, mass_total, &mut rng);

    let mut last_residual = T::infinity();
    for it in 1..=opts.max_iterations {
        for x in xs.iter_mut() {
            let mx = m.mul_vec(x);
            *x = chol.solve(&mx);
        }
        m_orthonormalize(m, &mut xs, &m_ones, mass_total, &mut rng);

        // Rayleigh–Ritz on the M-orthonormal block.
        let kx: Vec<Vec<T>> = xs.iter().map(|x| k.mul_vec(x)).collect();
        let mut red = vec![T::zero(); p * p];
        for i in 0..p {
            for j in i..p {
                let v = dot(&xs[i], &kx[j]);
                red[i * p + j] = v;
                red[j * p + i] = v;
            }
        }
        let (vals, vecs) = symmetric_eigen(&red, p);
        let combine = |c: usize, src: &[Vec<T>]| -> Vec<T> {
            let mut out = vec![T::zero(); n];
            for (i, s) in src.iter().enumerate() {
                axpy(vecs[i * p + c], s, &mut out);
            }
            out
        };
        let ritz: Vec<Vec<T>> = (0..p).map(|c| combine(c, &xs)).collect();
        let kritz: Vec<Vec<T>> = (0..2).map(|c| combine(c, &kx)).collect();

        let mut res = [T::zero(); 2];
        for c in 0..2 {
            let mx = m.mul_vec(&ritz[c]);
            let r: Vec<T> = kritz[c].iter().zip(&mx).map(|(&a, &b)| a - vals[c] * b).collect();
            res[c] = norm(&r) / norm(&mx);
        }
        xs = ritz;
        last_residual = res[0].max(res[1]);
        if last_residual <= tol {
            let (mu1, mu2) = (vals[0], vals[1]);
            let mut phi = xs.swap_remove(0);
            apply_sign_convention(&mut phi, nodes);
            return Ok(EigenPair {
                mu1,
                mu2,
                phi,
                sign_convention: SignConvention::MaxOnRight,
                residual: res[0],
                multiplicity_flag: (mu2 - mu1) / mu1 < T::lit(MULTIPLICITY_REL_GAP),
                iterations: it,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iterations,
        residual: last_residual.to_f64_lossy(),
    })
}

/// Assembles and solves on `mesh`.
pub fn solve_mesh<T: Real>(mesh: &TriMesh<T>, tol: T) -> Result<EigenPair<T>> {
    let (k, m) = assemble(mesh);
    solve_first_eigenpair(&k, &m, mesh.nodes(), tol)
}

/// Flips `phi` so its maximum lies to the right of its minimum. When the two
/// are level in `x` (symmetric domains), the rightmost node among those with
/// `|φ|` within `1e-6` of the peak is made positive, ties broken by larger `y`.
pub fn apply_sign_convention<T: Real>(phi: &mut [T], nodes: &[Point2<T>]) {
    let (mut imax, mut imin) = (0, 0);
    for i in 0..phi.len() {
        if phi[i] > phi[imax] {
            imax = i;
        }
        if phi[i] < phi[imin] {
            imin = i;
        }
    }
    let scale = nodes.iter().fold(T::one(), |s, p| s.max(p.x.abs()).max(p.y.abs()));
    let tie = T::lit(1e-9) * scale;
    let dx = nodes[imax].x - nodes[imin].x;
    let flip = if dx > tie {
        false
    } else if dx < -tie {
        true
    } else {
        let peak = phi[imax].max(-phi[imin]);
        let cut = peak * (T::one() - T::lit(1e-6));
        let pick = (0..phi.len())
            .filter(|&i| phi[i].abs() >= cut)
            .max_by(|&i, &j| {
                let (a, b) = (nodes[i], nodes[j]);
                a.x.partial_cmp(&b.x)
                    .unwrap()
                    .then(a.y.partial_cmp(&b.y).unwrap())
                    .then(j.cmp(&i))
            })
            .unwrap_or(imax);
        phi[pick] < T::zero()
    };
    if flip {
        phi.iter_mut().for_each(|v| *v = -*v);
    }
}

impl<T: Real> EigenPair<T> {
    /// P1 interpolation of `φ₁` at `p`.
    pub fn evaluate(&self, mesh: &TriMesh<T>, p: Point2<T>) -> Result<T> {
        mesh.interpolate(&self.phi, p)
    }

    pub fn max_value(&self) -> T {
        self.phi.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn argmax(&self) -> usize {
        (0..self.phi.len()).fold(0, |b, i| if self.phi[i] > self.phi[b] { i } else { b })
    }

    pub fn argmin(&self) -> usize {
        (0..self.phi.len()).fold(0, |b, i| if self.phi[i] < self.phi[b] { i } else { b })
    }

    /// Rayleigh quotient `φᵀKφ / φᵀMφ`.
    pub fn rayleigh_quotient(&self, k: &CsrMatrix<T>, m: &CsrMatrix<T>) -> T {
        k.form(&self.phi, &self.phi) / m.form(&self.phi, &self.phi)
    }

    pub fn cast<U: Real>(&self) -> EigenPair<U> {
        let c = |x: T| U::lit(x.to_f64_lossy());
        EigenPair {
            mu1: c(self.mu1),
            mu2: c(self.mu2),
            phi: self.phi.iter().map(|&x| c(x)).collect(),
            sign_convention: self.sign_convention,
            residual: c(self.residual),
            multiplicity_flag: self.multiplicity_flag,
            iterations: self.iterations,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConvexDomain;
    use crate::mesh::triangulate;
    use std::f64::consts::PI;

    #[test]
    fn rectangle_pair_invariants() {
        let r = ConvexDomain::<f64>::rectangle(10.0, 1.0).unwrap();
        let mesh = triangulate(&r, 0.05).unwrap();
        let (k, m) = assemble(&mesh);
        let pair = solve_first_eigenpair(&k, &m, mesh.nodes(), 1e-10).unwrap();
        assert!((pair.mu1 / (PI * PI / 100.0) - 1.0).abs() < 0.01);
        assert!(!pair.multiplicity_flag);
        assert!((m.form(&pair.phi, &pair.phi) - 1.0).abs() < 1e-9);
        let ones = vec![1.0; mesh.n_nodes()];
        assert!(m.form(&ones, &pair.phi).abs() < 1e-9);
        assert!(pair.residual <= 1e-8);
        assert!((pair.rayleigh_quotient(&k, &m) / pair.mu1 - 1.0).abs() < 1e-8);
        let nodes = mesh.nodes();
        assert!(nodes[pair.argmax()].x > nodes[pair.argmin()].x);

        // cos(πx/N) profile: zero on the midline, cos(π/4) at a quarter.
        let peak = pair.max_value();
        let mid = pair.evaluate(&mesh, Point2::new(5.0, 0.5)).unwrap() / peak;
        assert!(mid.abs() < 0.02);
        for y in [0.1, 0.5, 0.9] {
            let q = pair.evaluate(&mesh, Point2::new(2.5, y)).unwrap() / peak;
            assert!((q.abs() - (PI / 4.0).cos()).abs() < 0.02, "{q}");
        }
    }

    #[test]
    fn square_is_flagged() {
        let sq = ConvexDomain::<f64>::rectangle(1.0, 1.0).unwrap();
        let pair = solve_mesh(&triangulate(&sq, 0.05).unwrap(), 1e-10).unwrap();
        assert!((pair.mu1 / (PI * PI) - 1.0).abs() < 0.01);
        assert!(pair.multiplicity_flag);
    }

    #[test]
    fn sign_convention_tie_break() {
        let nodes = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(1.0, 1.0), Point2::new(0.0, 1.0)];
        // Max and min level in x: the rightmost extremal node (largest y) becomes positive.
        let mut phi = [0.2, 1.0, -1.0, 0.1];
        apply_sign_convention(&mut phi, &nodes);
        assert_eq!(phi, [-0.2, -1.0, 1.0, -0.1]);
        let mut phi = [1.0, -1.0, -0.5, 0.5];
        apply_sign_convention(&mut phi, &nodes);
        assert_eq!(phi[1], 1.0);
    }

    #[test]
    fn f32_solve() {
        let r = ConvexDomain::<f32>::rectangle(5.0, 1.0).unwrap();
        let pair = solve_mesh(&triangulate(&r, 0.1).unwrap(), 1e-3).unwrap();
        assert!((pair.mu1 / (std::f32::consts::PI.powi(2) / 25.0) - 1.0).abs() < 0.01);
    }

    #[test]
    fn rejects_tiny_tol() {
        let r = ConvexDomain::<f64>::rectangle(2.0, 1.0).unwrap();
        assert!(solve_mesh(&triangulate(&r, 0.25).unwrap(), 1e-14).is_err());
    }
}
