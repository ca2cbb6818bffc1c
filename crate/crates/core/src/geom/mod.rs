//! Ground-truth geometry, local frames and synthetic measurements.
//!
//! Positions are [`Position3`] points; displacements, bearings and local
//! relative positions are plain `Vector3<f64>` values.

mod generate;
mod measure;
mod network;

use std::fmt;

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};

pub use generate::{random_frames, random_geometric_edges, random_positions, seeded_rng, RNG_ALGORITHM};
pub use measure::{synthesize_measurements, AngleKey, MeasurementKind, MeasurementSet, NoiseSpec};
pub use network::{Edge, LocalFrame, NetworkGraph};

/// A point in 3-D Euclidean space.
pub type Position3 = Point3<f64>;

/// Tolerance on `| ||g|| - 1 |` for a vector to count as a unit bearing.
pub const UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for NodeId {
    fn from(id: usize) -> Self {
        NodeId(id)
    }
}

pub fn pairwise_distance(a: &Position3, b: &Position3) -> f64 {
    (b - a).norm()
}

/// Unit vector pointing from `a` toward `b`.
pub fn relative_bearing(a: &Position3, b: &Position3) -> Result<Vector3<f64>> {
    let e = b - a;
    let d = e.norm();
    if d == 0.0 {
        return Err(Error::DegenerateGeometry(format!(
            "bearing between coincident points {a:?}"
        )));
    }
    Ok(e / d)
}

/// Angle at vertex `at` subtended by `u` and `v`, in `[0, pi]`.
///
/// Computed as `atan2(|a x b|, a . b)`, which stays accurate near 0 and pi
/// where a clamped `acos` loses half the available digits.
pub fn interior_angle(at: &Position3, u: &Position3, v: &Position3) -> Result<f64> {
    let a = u - at;
    let b = v - at;
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(Error::DegenerateGeometry(format!(
            "interior angle at {at:?} with a coincident endpoint"
        )));
    }
    Ok(a.cross(&b).norm().atan2(a.dot(&b)))
}

/// Cosine of the angle between two bearings measured in the same frame.
///
/// The frame rotation cancels in the dot product, so the value is the same
/// whichever frame both bearings are expressed in.
pub fn cos_angle_from_local_bearings(g1: &Vector3<f64>, g2: &Vector3<f64>) -> Result<f64> {
    check_unit(g1)?;
    check_unit(g2)?;
    Ok(g1.dot(g2))
}

/// Sine of the angle between two unit bearings, via the cross product.
pub(crate) fn sin_angle_between(g1: &Vector3<f64>, g2: &Vector3<f64>) -> f64 {
    g1.cross(g2).norm()
}

pub(crate) fn check_unit(g: &Vector3<f64>) -> Result<()> {
    let n = g.norm();
    if !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
        return Err(Error::Validation(format!(
            "bearing {:?} is not unit length (norm {n})",
            g.as_slice()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

    fn p(x: f64, y: f64, z: f64) -> Position3 {
        Position3::new(x, y, z)
    }

    #[test]
    fn distances() {
        assert_eq!(pairwise_distance(&p(0., 0., 0.), &p(1., 0., 0.)), 1.0);
        assert_eq!(pairwise_distance(&p(0., 0., 0.), &p(0., 0., 0.)), 0.0);
        assert_eq!(pairwise_distance(&p(1., 2., 3.), &p(4., 6., 3.)), 5.0);
    }

    #[test]
    fn bearings() {
        let g = relative_bearing(&p(0., 0., 0.), &p(2., 0., 0.)).unwrap();
        assert_eq!(g, Vector3::new(1., 0., 0.));
        let g = relative_bearing(&p(0., 0., 0.), &p(1., 1., 0.)).unwrap();
        assert_abs_diff_eq!(g, Vector3::new(SQRT_2 / 2., SQRT_2 / 2., 0.), epsilon = 1e-15);
        let g = relative_bearing(&p(1., 1., 1.), &p(1., 1., 0.)).unwrap();
        assert_eq!(g, Vector3::new(0., 0., -1.));
        assert!(matches!(
            relative_bearing(&p(1., 1., 1.), &p(1., 1., 1.)),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn angles() {
        let o = p(0., 0., 0.);
        assert_abs_diff_eq!(
            interior_angle(&o, &p(1., 0., 0.), &p(0., 1., 0.)).unwrap(),
            FRAC_PI_2,
            epsilon = 1e-15
        );
        assert_eq!(interior_angle(&o, &p(1., 0., 0.), &p(2., 0., 0.)).unwrap(), 0.0);
        assert_eq!(interior_angle(&o, &p(1., 0., 0.), &p(-3., 0., 0.)).unwrap(), PI);
        assert!(interior_angle(&o, &o, &p(1., 0., 0.)).is_err());
    }

    #[test]
    fn local_bearing_cosines() {
        let x = Vector3::x();
        assert_eq!(cos_angle_from_local_bearings(&x, &Vector3::y()).unwrap(), 0.0);
        assert_eq!(cos_angle_from_local_bearings(&x, &x).unwrap(), 1.0);
        assert!(matches!(
            cos_angle_from_local_bearings(&(2.0 * x), &x),
            Err(Error::Validation(_))
        ));
    }
}
