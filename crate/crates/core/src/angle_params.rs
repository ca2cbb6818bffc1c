//! Triangle angles from the six scalar angle-constraint parameters.
//!
//! For a triangle `(i, j, k)` with interior angles `theta_*` and side lengths
//! `d_ij, d_ik, d_jk`, the parameters satisfy
//!
//! ```text
//! w_ik d_ik d_ij cos(theta_i) + w_ki d_ik d_jk cos(theta_k) = 0
//! w_ij d_ik d_ij cos(theta_i) + w_ji d_ij d_jk cos(theta_j) = 0
//! w_jk d_jk d_ij cos(theta_j) + w_kj d_ik d_jk cos(theta_k) = 0
//! ```
//!
//! with every pair `(w_ab, w_ba)` not both zero. Only the ratios inside each
//! pair carry information. [`AngleParameterSet::recover_angles`] inverts the
//! relation in closed form, distinguishing three situations:
//!
//! * some parameter is zero: one angle is right;
//! * no parameter is zero and a ratio sum equals one: the points are colinear;
//! * otherwise a proper triangle, acute or with one obtuse vertex given by the
//!   sign pattern of the pair products.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use crate::error::{Error, Result};
use crate::geom::{interior_angle, pairwise_distance, Position3};

/// Default relative tolerance for zero parameters and unit ratio sums.
pub const DEFAULT_EPS_COL: f64 = 1e-9;

/// Tolerance on `theta_i + theta_j + theta_k - pi`.
pub const ANGLE_SUM_TOL: f64 = 1e-9;

/// Angles whose sine is below this are treated as exactly 0 or pi.
const FLAT_SINE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Vertex {
    I,
    J,
    K,
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Vertex::I => "i",
            Vertex::J => "j",
            Vertex::K => "k",
        })
    }
}

/// Names one of the six parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Param {
    Ik,
    Ki,
    Ij,
    Ji,
    Jk,
    Kj,
}

impl Param {
    pub const ALL: [Param; 6] = [Param::Ik, Param::Ki, Param::Ij, Param::Ji, Param::Jk, Param::Kj];
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Param::Ik => "w_ik",
            Param::Ki => "w_ki",
            Param::Ij => "w_ij",
            Param::Ji => "w_ji",
            Param::Jk => "w_jk",
            Param::Kj => "w_kj",
        })
    }
}

/// The three colinearity ratio sums.
///
/// * `I`: `w_ki/w_ik + w_ji/w_ij` (equals `1 - tan(theta_j) tan(theta_k)`)
/// * `J`: `w_ij/w_ji + w_kj/w_jk` (equals `1 - tan(theta_i) tan(theta_k)`)
/// * `K`: `w_ik/w_ki + w_jk/w_kj` (equals `1 - tan(theta_i) tan(theta_j)`)
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RatioSum {
    I,
    J,
    K,
}

/// Classification of a parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseLabel {
    /// The first vanishing parameter (in [`Param::ALL`] order).
    ZeroProduct(Param),
    /// Colinear points; the vertex whose angle is pi (the middle point).
    Colinear(Vertex),
    /// A proper triangle with the obtuse vertex, if any.
    Generic(Option<Vertex>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleAngles {
    pub theta_i: f64,
    pub theta_j: f64,
    pub theta_k: f64,
}

impl TriangleAngles {
    pub fn new(theta_i: f64, theta_j: f64, theta_k: f64) -> Result<Self> {
        let a = TriangleAngles {
            theta_i,
            theta_j,
            theta_k,
        };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        for t in self.as_array() {
            if !(0.0..=PI).contains(&t) {
                return Err(Error::Validation(format!("angle {t} outside [0, pi]")));
            }
        }
        let sum = self.theta_i + self.theta_j + self.theta_k;
        if (sum - PI).abs() > ANGLE_SUM_TOL {
            return Err(Error::Validation(format!("angles sum to {sum}, expected pi")));
        }
        Ok(())
    }

    /// Interior angles of the triangle `(p_i, p_j, p_k)`.
    pub fn from_points(p_i: &Position3, p_j: &Position3, p_k: &Position3) -> Result<Self> {
        let theta_i = interior_angle(p_i, p_j, p_k)?;
        let theta_j = interior_angle(p_j, p_i, p_k)?;
        let theta_k = interior_angle(p_k, p_i, p_j)?;
        Ok(TriangleAngles {
            theta_i,
            theta_j,
            theta_k,
        })
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.theta_i, self.theta_j, self.theta_k]
    }

    pub fn get(&self, v: Vertex) -> f64 {
        match v {
            Vertex::I => self.theta_i,
            Vertex::J => self.theta_j,
            Vertex::K => self.theta_k,
        }
    }

    /// The vertex with a flat (pi) angle, if the triple is colinear.
    fn flat_vertex(&self) -> Option<Vertex> {
        if self.as_array().iter().all(|t| t.sin().abs() > FLAT_SINE) {
            return None;
        }
        [Vertex::I, Vertex::J, Vertex::K]
            .into_iter()
            .max_by(|a, b| self.get(*a).total_cmp(&self.get(*b)))
    }
}

/// Side lengths `d_ij, d_ik, d_jk`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideLengths {
    pub d_ij: f64,
    pub d_ik: f64,
    pub d_jk: f64,
}

impl SideLengths {
    pub fn from_points(p_i: &Position3, p_j: &Position3, p_k: &Position3) -> Self {
        SideLengths {
            d_ij: pairwise_distance(p_i, p_j),
            d_ik: pairwise_distance(p_i, p_k),
            d_jk: pairwise_distance(p_j, p_k),
        }
    }

    /// Length of the side opposite `v`.
    fn opposite(&self, v: Vertex) -> f64 {
        match v {
            Vertex::I => self.d_jk,
            Vertex::J => self.d_ik,
            Vertex::K => self.d_ij,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleParameterSet {
    pub w_ik: f64,
    pub w_ki: f64,
    pub w_ij: f64,
    pub w_ji: f64,
    pub w_jk: f64,
    pub w_kj: f64,
}

/// Outcome of the ratio-sum colinearity test.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ColinearityTest {
    pub colinear: bool,
    /// Every ratio sum that equals one within tolerance.
    pub fired: Vec<RatioSum>,
}

impl AngleParameterSet {
    pub fn new(w_ik: f64, w_ki: f64, w_ij: f64, w_ji: f64, w_jk: f64, w_kj: f64) -> Result<Self> {
        let p = AngleParameterSet {
            w_ik,
            w_ki,
            w_ij,
            w_ji,
            w_jk,
            w_kj,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.as_array().iter().all(|w| w.is_finite()) {
            return Err(Error::Validation("angle parameters must be finite".into()));
        }
        for (a, b, name) in [
            (self.w_ik, self.w_ki, "w_ik, w_ki"),
            (self.w_ij, self.w_ji, "w_ij, w_ji"),
            (self.w_jk, self.w_kj, "w_jk, w_kj"),
        ] {
            if a * a + b * b == 0.0 {
                return Err(Error::Validation(format!(
                    "parameter pair ({name}) is identically zero"
                )));
            }
        }
        Ok(())
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.w_ik, self.w_ki, self.w_ij, self.w_ji, self.w_jk, self.w_kj]
    }

    pub fn get(&self, p: Param) -> f64 {
        match p {
            Param::Ik => self.w_ik,
            Param::Ki => self.w_ki,
            Param::Ij => self.w_ij,
            Param::Ji => self.w_ji,
            Param::Jk => self.w_jk,
            Param::Kj => self.w_kj,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        let [a, b, cc, d, e, f] = self.as_array().map(|w| w * c);
        AngleParameterSet {
            w_ik: a,
            w_ki: b,
            w_ij: cc,
            w_ji: d,
            w_jk: e,
            w_kj: f,
        }
    }

    fn zero_param(&self, eps: f64) -> Option<Param> {
        let scale = self.as_array().iter().fold(0.0f64, |m, w| m.max(w.abs()));
        Param::ALL.into_iter().find(|&p| self.get(p).abs() <= eps * scale)
    }

    /// Ratio-sum test with the default tolerance.
    pub fn is_colinear(&self) -> ColinearityTest {
        self.is_colinear_with(DEFAULT_EPS_COL)
    }

    pub fn is_colinear_with(&self, eps: f64) -> ColinearityTest {
        if self.validate().is_err() || self.zero_param(eps).is_some() {
            return ColinearityTest::default();
        }
        let near_one = |a: f64, b: f64| ((a + b) - 1.0).abs() <= eps * (1.0 + a.abs() + b.abs());
        let sums = [
            (RatioSum::I, self.w_ki / self.w_ik, self.w_ji / self.w_ij),
            (RatioSum::J, self.w_ij / self.w_ji, self.w_kj / self.w_jk),
            (RatioSum::K, self.w_ik / self.w_ki, self.w_jk / self.w_kj),
        ];
        let fired: Vec<RatioSum> = sums
            .into_iter()
            .filter(|&(_, a, b)| near_one(a, b))
            .map(|(s, _, _)| s)
            .collect();
        ColinearityTest {
            colinear: !fired.is_empty(),
            fired,
        }
    }

    pub fn classify(&self) -> Result<CaseLabel> {
        self.classify_with(DEFAULT_EPS_COL)
    }

    pub fn classify_with(&self, eps: f64) -> Result<CaseLabel> {
        self.validate()?;
        if let Some(p) = self.zero_param(eps) {
            return Ok(CaseLabel::ZeroProduct(p));
        }
        let ki = self.w_ki * self.w_ik;
        let ji = self.w_ji * self.w_ij;
        let kj = self.w_kj * self.w_jk;
        if self.is_colinear_with(eps).colinear {
            // the flat vertex is the one whose opposite pair has opposite signs
            return match (kj < 0.0, ki < 0.0, ji < 0.0) {
                (true, false, false) => Ok(CaseLabel::Colinear(Vertex::I)),
                (false, true, false) => Ok(CaseLabel::Colinear(Vertex::J)),
                (false, false, true) => Ok(CaseLabel::Colinear(Vertex::K)),
                _ => Err(Error::InconsistentParameters(format!(
                    "colinear ratio sum with sign pattern (w_kj w_jk, w_ki w_ik, w_ji w_ij) = ({kj:e}, {ki:e}, {ji:e})"
                ))),
            };
        }
        match (ki < 0.0, ji < 0.0, kj < 0.0) {
            (true, true, true) => Ok(CaseLabel::Generic(None)),
            (false, false, true) => Ok(CaseLabel::Generic(Some(Vertex::I))),
            (false, true, false) => Ok(CaseLabel::Generic(Some(Vertex::K))),
            (true, false, false) => Ok(CaseLabel::Generic(Some(Vertex::J))),
            _ => Err(Error::InconsistentParameters(format!(
                "sign pattern (w_ki w_ik, w_ji w_ij, w_kj w_jk) = ({ki:e}, {ji:e}, {kj:e}) admits no triangle"
            ))),
        }
    }

    pub fn recover_angles(&self) -> Result<TriangleAngles> {
        self.recover_angles_with(DEFAULT_EPS_COL)
    }

    pub fn recover_angles_with(&self, eps: f64) -> Result<TriangleAngles> {
        match self.classify_with(eps)? {
            CaseLabel::ZeroProduct(p) => self.recover_right(p),
            CaseLabel::Colinear(v) => Ok(match v {
                Vertex::I => TriangleAngles {
                    theta_i: PI,
                    theta_j: 0.0,
                    theta_k: 0.0,
                },
                Vertex::J => TriangleAngles {
                    theta_i: 0.0,
                    theta_j: PI,
                    theta_k: 0.0,
                },
                Vertex::K => TriangleAngles {
                    theta_i: 0.0,
                    theta_j: 0.0,
                    theta_k: PI,
                },
            }),
            CaseLabel::Generic(obtuse) => self.recover_generic(obtuse),
        }
    }

    /// One parameter vanishes: its equation forces a right angle, and the
    /// equation that does not involve that vertex fixes the split of the
    /// remaining right angle via `tan^2 = -w_ab / w_ba`.
    fn recover_right(&self, zero: Param) -> Result<TriangleAngles> {
        let (right, num, den) = match zero {
            Param::Ik | Param::Jk => (Vertex::K, self.w_ij, self.w_ji),
            Param::Ki | Param::Ji => (Vertex::I, self.w_jk, self.w_kj),
            Param::Ij | Param::Kj => (Vertex::J, self.w_ik, self.w_ki),
        };
        let radicand = -num / den;
        if !(radicand.is_finite() && radicand > 0.0) {
            return Err(Error::InconsistentParameters(format!(
                "{zero} = 0 forces a right angle at {right}, but -{num:e}/{den:e} has no positive root"
            )));
        }
        let t = radicand.sqrt().atan();
        let rest = FRAC_PI_2 - t;
        // the arctan lands on i when the right angle is at j or k, else on j
        Ok(match right {
            Vertex::K => TriangleAngles {
                theta_i: t,
                theta_j: rest,
                theta_k: FRAC_PI_2,
            },
            Vertex::I => TriangleAngles {
                theta_i: FRAC_PI_2,
                theta_j: t,
                theta_k: rest,
            },
            Vertex::J => TriangleAngles {
                theta_i: t,
                theta_j: FRAC_PI_2,
                theta_k: rest,
            },
        })
    }

    /// Proper triangle: `tan^2(theta_i)` from the closed form, its sign from
    /// the obtuse vertex, then `tan(theta_k) = -(w_ki/w_ik) tan(theta_i)` and
    /// `tan(theta_j) = -(w_ji/w_ij) tan(theta_i)`.
    fn recover_generic(&self, obtuse: Option<Vertex>) -> Result<TriangleAngles> {
        let r_ki = self.w_ki / self.w_ik;
        let r_ji = self.w_ji / self.w_ij;
        let radicand = (1.0 - r_ki - r_ji) / (r_ki * r_ji);
        if !(radicand.is_finite() && radicand > 0.0) {
            return Err(Error::InconsistentParameters(format!(
                "tan^2(theta_i) = {radicand:e} has no positive root"
            )));
        }
        let mut tan_i = radicand.sqrt();
        if obtuse == Some(Vertex::I) {
            tan_i = -tan_i;
        }
        let tan_k = -r_ki * tan_i;
        let tan_j = -r_ji * tan_i;
        let angles = TriangleAngles {
            theta_i: angle_from_tan(tan_i),
            theta_j: angle_from_tan(tan_j),
            theta_k: angle_from_tan(tan_k),
        };
        let expected_obtuse = [Vertex::I, Vertex::J, Vertex::K]
            .into_iter()
            .find(|&v| angles.get(v) > FRAC_PI_2);
        if expected_obtuse != obtuse {
            return Err(Error::InconsistentParameters(format!(
                "recovered angles {angles:?} contradict the sign pattern (obtuse {obtuse:?})"
            )));
        }
        Ok(angles)
    }
}

/// Angle in `(0, pi)` with the given tangent.
fn angle_from_tan(t: f64) -> f64 {
    if t >= 0.0 {
        t.atan()
    } else {
        PI + t.atan()
    }
}

/// Canonical parameters for a triangle.
///
/// Proper triangles use `w_ab = sin(theta_a) cos(theta_b)` and
/// `w_ba = -sin(theta_b) cos(theta_a)` for the pairs `(i,k)`, `(i,j)`,
/// `(j,k)`. Flat triangles have vanishing sines, so the side lengths replace
/// them (`sin(theta_a)` becomes the side opposite `a`) and must be supplied.
pub fn params_from_angles(angles: &TriangleAngles, lengths: Option<&SideLengths>) -> Result<AngleParameterSet> {
    angles.validate()?;
    let [ci, cj, ck] = angles.as_array().map(f64::cos);
    let (si, sj, sk) = match angles.flat_vertex() {
        None => (angles.theta_i.sin(), angles.theta_j.sin(), angles.theta_k.sin()),
        Some(flat) => {
            let l = lengths
                .ok_or_else(|| Error::Validation("colinear angles need side lengths to fix the parameters".into()))?;
            check_colinear_lengths(l, flat)?;
            (l.d_jk, l.d_ik, l.d_ij)
        }
    };
    AngleParameterSet::new(si * ck, -sk * ci, si * cj, -sj * ci, sj * ck, -sk * cj)
}

fn check_colinear_lengths(l: &SideLengths, flat: Vertex) -> Result<()> {
    if ![l.d_ij, l.d_ik, l.d_jk].iter().all(|d| d.is_finite() && *d > 0.0) {
        return Err(Error::Validation(format!("side lengths {l:?} must be positive")));
    }
    let long = l.opposite(flat);
    let others = l.d_ij + l.d_ik + l.d_jk - long;
    if (long - others).abs() > 1e-9 * long {
        return Err(Error::Validation(format!(
            "side lengths {l:?} are not colinear with the flat angle at {flat}: {long} != {others}"
        )));
    }
    Ok(())
}

/// Parameters of the triangle spanned by three points.
///
/// Near-flat triples (some angle with sine below 1e-12) are snapped to exact
/// 0/pi angles and parameterized by their side lengths.
pub fn params_from_points(
    p_i: &Position3,
    p_j: &Position3,
    p_k: &Position3,
) -> Result<(TriangleAngles, AngleParameterSet)> {
    let mut angles = TriangleAngles::from_points(p_i, p_j, p_k)?;
    let lengths = SideLengths::from_points(p_i, p_j, p_k);
    if let Some(flat) = angles.flat_vertex() {
        angles = match flat {
            Vertex::I => TriangleAngles {
                theta_i: PI,
                theta_j: 0.0,
                theta_k: 0.0,
            },
            Vertex::J => TriangleAngles {
                theta_i: 0.0,
                theta_j: PI,
                theta_k: 0.0,
            },
            Vertex::K => TriangleAngles {
                theta_i: 0.0,
                theta_j: 0.0,
                theta_k: PI,
            },
        };
    }
    let params = params_from_angles(&angles, Some(&lengths))?;
    Ok((angles, params))
}

/// Residuals of the three parameter equations for given angles and lengths.
pub fn equation_residuals(p: &AngleParameterSet, angles: &TriangleAngles, l: &SideLengths) -> [f64; 3] {
    let [ci, cj, ck] = angles.as_array().map(f64::cos);
    [
        p.w_ik * l.d_ik * l.d_ij * ci + p.w_ki * l.d_ik * l.d_jk * ck,
        p.w_ij * l.d_ik * l.d_ij * ci + p.w_ji * l.d_ij * l.d_jk * cj,
        p.w_jk * l.d_jk * l.d_ij * cj + p.w_kj * l.d_ik * l.d_jk * ck,
    ]
}
