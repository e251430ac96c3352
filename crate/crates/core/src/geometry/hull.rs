use crate::point::{orient, Point2};
use crate::scalar::Real;

/// Convex hull by Andrew's monotone chain; counterclockwise, no collinear points.
pub fn convex_hull<T: Real>(points: &[Point2<T>]) -> Vec<Point2<T>> {
    let mut pts: Vec<Point2<T>> = points.to_vec();
    pts.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap().then(a.y.partial_cmp(&b.y).unwrap()));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Point2<T>> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && orient(lower[lower.len() - 2], lower[lower.len() - 1], p) <= T::zero() {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point2<T>> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && orient(upper[upper.len() - 2], upper[upper.len() - 1], p) <= T::zero() {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}
