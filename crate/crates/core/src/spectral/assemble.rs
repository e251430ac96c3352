use super::sparse::CsrMatrix;
use crate::mesh::TriMesh;
use crate::point::orient;
use crate::scalar::Real;

/// Local P1 stiffness matrix of a counterclockwise triangle (cotangent formula).
pub fn element_stiffness<T: Real>(p: [crate::Point2<T>; 3]) -> [[T; 3]; 3] {
    let area = orient(p[0], p[1], p[2]) * T::lit(0.5);
    let g: [crate::Point2<T>; 3] = std::array::from_fn(|i| (p[(i + 2) % 3] - p[(i + 1) % 3]).perp());
    let s = T::one() / (T::lit(4.0) * area);
    std::array::from_fn(|i| std::array::from_fn(|j| g[i].dot(g[j]) * s))
}

/// Local consistent P1 mass matrix: `area/12 · [2 1 1; 1 2 1; 1 1 2]`.
pub fn element_mass<T: Real>(p: [crate::Point2<T>; 3]) -> [[T; 3]; 3] {
    let area = orient(p[0], p[1], p[2]) * T::lit(0.5);
    let off = area / T::lit(12.0);
    std::array::from_fn(|i| std::array::from_fn(|j| if i == j { off + off } else { off }))
}

/// Global stiffness `K` and mass `M` for the Neumann problem (natural
/// boundary condition, no boundary terms).
pub fn assemble<T: Real>(mesh: &TriMesh<T>) -> (CsrMatrix<T>, CsrMatrix<T>) {
    let rows: Vec<Vec<usize>> = mesh
        .adjacency()
        .into_iter()
        .enumerate()
        .map(|(i, mut r)| {
            r.push(i);
            r.sort_unstable();
            r
        })
        .collect();
    let mut k = CsrMatrix::with_pattern(&rows);
    let mut m = CsrMatrix::with_pattern(&rows);
    for (t, tv) in mesh.triangles().iter().enumerate() {
        let p = mesh.triangle_points(t);
        let ke = element_stiffness(p);
        let me = element_mass(p);
        for a in 0..3 {
            for b in 0..3 {
                k.add(tv[a], tv[b], ke[a][b]);
                m.add(tv[a], tv[b], me[a][b]);
            }
        }
    }
    (k, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ConvexDomain, DomainSpec};
    use crate::mesh::triangulate;
    use crate::Point2;

    #[test]
    fn reference_triangle() {
        let p = [Point2::new(0.0f64, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)];
        let k = element_stiffness(p);
        let expect = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((k[i][j] - expect[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn kernel_and_partition_of_unity() {
        let d = DomainSpec::ellipse(3.0, 1.0).build().unwrap();
        let mesh = triangulate(&d, 0.15).unwrap();
        let (k, m) = assemble(&mesh);
        for i in 0..k.dim() {
            assert!(k.row_sum(i).abs() < 1e-10);
        }
        assert!((m.total_sum() - d.area()).abs() < 1e-9 * d.area());
        assert!(k.max_asymmetry() < 1e-14 && m.max_asymmetry() < 1e-16);
        assert!(k.nnz() as f64 / k.dim() as f64 <= 9.0);
    }

    #[test]
    fn f32_row_sums() {
        let r = ConvexDomain::<f32>::rectangle(2.0, 1.0).unwrap();
        let mesh = triangulate(&r, 0.2).unwrap();
        let (k, _) = assemble(&mesh);
        assert!((0..k.dim()).all(|i| k.row_sum(i).abs() < 1e-4));
    }
}
