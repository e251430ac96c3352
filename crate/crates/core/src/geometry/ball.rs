//! Exact area of a convex polygon intersected with a disk.

use super::domain::ConvexDomain;
use crate::error::{invalid, Error, Result};
use crate::point::Point2;
use crate::scalar::Real;

/// `|{y ∈ Ω : ‖y − center‖ ≤ radius}|`.
///
/// Each edge contributes the signed area of the triangle (center, a, b)
/// clipped to the disk: straight pieces inside the circle add a triangle,
/// pieces outside add a circular sector.
pub fn ball_volume<T: Real>(d: &ConvexDomain<T>, center: Point2<T>, radius: T) -> Result<T> {
    if !(radius > T::zero()) {
        return Err(invalid("radius", "must be positive"));
    }
    let tol = T::lit(1e-9).max(T::geom_tol(d.coord_scale()));
    if !d.contains_tol(center, tol) {
        return Err(Error::OutsideDomain {
            x: center.x.to_f64_lossy(),
            y: center.y.to_f64_lossy(),
        });
    }
    Ok(polygon_disk_area(d.vertices(), center, radius))
}

/// Area of `polygon ∩ disk` for a counterclockwise polygon; `center` may lie anywhere.
pub fn polygon_disk_area<T: Real>(vs: &[Point2<T>], center: Point2<T>, radius: T) -> T {
    let n = vs.len();
    let mut area = T::zero();
    for i in 0..n {
        area += edge_contribution(vs[i] - center, vs[(i + 1) % n] - center, radius);
    }
    area.max(T::zero())
}

fn edge_contribution<T: Real>(p: Point2<T>, q: Point2<T>, r: T) -> T {
    let half = T::lit(0.5);
    let d = q - p;
    let a = d.norm2();
    if a <= T::zero() {
        return T::zero();
    }
    let b = T::lit(2.0) * p.dot(d);
    let c = p.norm2() - r * r;
    let disc = b * b - T::lit(4.0) * a * c;

    let mut cuts = [T::zero(), T::one(), T::one(), T::one()];
    let mut m = 1;
    if disc > T::zero() {
        let s = disc.sqrt();
        let two_a = T::lit(2.0) * a;
        for t in [(-b - s) / two_a, (-b + s) / two_a] {
            if t > T::zero() && t < T::one() {
                cuts[m] = t;
                m += 1;
            }
        }
    }
    cuts[m] = T::one();

    let mut total = T::zero();
    for k in 0..m {
        let p0 = p + d * cuts[k];
        let p1 = p + d * cuts[k + 1];
        let mid = (p0 + p1) * half;
        if mid.norm2() <= r * r {
            total += half * p0.cross(p1);
        } else {
            total += half * r * r * p0.cross(p1).atan2(p0.dot(p1));
        }
    }
    total
}
