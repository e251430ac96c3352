use serde::{Deserialize, Serialize};

use super::calipers::{diameter, edge_widths, width_along};
use super::chebyshev::inradius_incenter;
use super::domain::ConvexDomain;
use crate::error::Result;
use crate::point::Point2;
use crate::scalar::Real;

/// Outcome of [`normalize`]; lengths are post-normalization unless noted.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormalizationReport<T> {
    /// Rotation applied to the input, radians in `(−π/2, π/2]`.
    pub rotation_angle: T,
    /// Dilation applied after rotating (`1 / inradius` of the input).
    pub scale: T,
    pub inradius: T,
    pub diameter: T,
    /// Operational elongation `diam / inrad` (here simply the normalized diameter).
    #[serde(rename = "aspect_N")]
    pub aspect_n: T,
    pub incenter: Point2<T>,
    /// Projection onto the y-axis, the minimal width over all rotations.
    pub min_width: T,
    /// Projection onto the x-axis.
    pub x_extent: T,
}

impl<T: Real> NormalizationReport<T> {
    /// `x_extent / min_width`: for an `N × 1` rectangle this is exactly `N`.
    pub fn length_over_width(&self) -> T {
        self.x_extent / self.min_width
    }
}

/// Rotates the minimal-width direction onto the y-axis, dilates to unit
/// inradius and translates so that the bounding box starts at the origin
/// (leftmost vertex at `x = 0`, lowest at `y = 0`).
pub fn normalize<T: Real>(d: &ConvexDomain<T>) -> Result<(ConvexDomain<T>, NormalizationReport<T>)> {
    let widths = edge_widths(d);
    let w_min = widths.iter().copied().fold(T::infinity(), T::min);
    let tol = w_min * T::lit(1e-12).max(T::epsilon() * T::lit(64.0));
    let half_pi = T::FRAC_PI_2();

    // Among (numerically) minimal-width edges, prefer the smallest rotation so
    // that normalizing twice is the identity.
    let mut best: Option<T> = None;
    for (i, &w) in widths.iter().enumerate() {
        if w > w_min + tol {
            continue;
        }
        let (a, b) = d.edge(i);
        let nrm = (b - a).perp();
        let mut alpha = half_pi - nrm.y.atan2(nrm.x);
        while alpha > half_pi {
            alpha -= T::PI();
        }
        while alpha <= -half_pi {
            alpha += T::PI();
        }
        if (alpha - half_pi).abs() <= tol {
            alpha = half_pi;
        }
        if alpha.abs() <= T::geom_tol(T::one()) {
            alpha = T::zero();
        }
        best = match best {
            Some(cur) if cur.abs() <= alpha.abs() => Some(cur),
            _ => Some(alpha),
        };
    }
    let alpha = best.unwrap_or(T::zero());

    let rotated = d.transformed(alpha, T::one(), Point2::zero())?;
    let (r0, _) = inradius_incenter(&rotated)?;
    let scale = T::one() / r0;
    let scaled = rotated.transformed(T::zero(), scale, Point2::zero())?;
    let (lo, _) = scaled.bbox();
    let out = scaled.transformed(T::zero(), T::one(), -lo)?;

    let (inradius, incenter) = inradius_incenter(&out)?;
    let diam = diameter(&out).2;
    let (lo, hi) = out.bbox();
    let report = NormalizationReport {
        rotation_angle: alpha,
        scale,
        inradius,
        diameter: diam,
        aspect_n: diam / inradius,
        incenter,
        min_width: width_along(&out, Point2::new(T::zero(), T::one())),
        x_extent: hi.x - lo.x,
    };
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::calipers::min_width;

    #[test]
    fn axis_aligned_rectangle() {
        let r = ConvexDomain::<f64>::rectangle(10.0, 1.0).unwrap();
        let (n, rep) = normalize(&r).unwrap();
        assert_eq!(rep.rotation_angle, 0.0);
        assert!((rep.scale - 2.0).abs() < 1e-12);
        assert!((rep.aspect_n - 2.0 * 101f64.sqrt()).abs() < 1e-9);
        assert!((rep.inradius - 1.0).abs() < 1e-9);
        assert!((rep.length_over_width() - 10.0).abs() < 1e-12);
        let (lo, _) = n.bbox();
        assert_eq!(lo.x, 0.0);
    }

    #[test]
    fn recovers_rotation() {
        let r = ConvexDomain::<f64>::rectangle(10.0, 1.0).unwrap();
        let a = 30f64.to_radians();
        let rr = r.transformed(a, 1.0, Point2::new(3.0, -1.0)).unwrap();
        let (_, rep) = normalize(&rr).unwrap();
        assert!((rep.rotation_angle + a).abs() < 1e-9);
    }

    #[test]
    fn y_width_is_minimal_and_idempotent() {
        let xy = [(0.0, 0.0), (7.0, 1.0), (8.0, 2.5), (1.0, 3.0), (-1.0, 1.0)];
        let d = ConvexDomain::<f64>::from_xy(&xy).unwrap();
        let (n1, rep) = normalize(&d).unwrap();
        assert!((rep.min_width - min_width(&n1).0).abs() < 1e-9);
        let (n2, rep2) = normalize(&n1).unwrap();
        assert_eq!(rep2.rotation_angle, 0.0);
        for (p, q) in n1.vertices().iter().zip(n2.vertices()) {
            assert!(p.dist(*q) < 1e-9);
        }
    }
}
