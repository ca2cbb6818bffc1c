use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::{check_unit, interior_angle, relative_bearing, seeded_rng, Edge, NetworkGraph, NodeId, Position3};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MeasurementKind {
    RelativePosition,
    Distance,
    RatioOfDistance,
    LocalBearing,
    Angle,
}

impl MeasurementKind {
    pub const ALL: [MeasurementKind; 5] = [
        MeasurementKind::RelativePosition,
        MeasurementKind::Distance,
        MeasurementKind::RatioOfDistance,
        MeasurementKind::LocalBearing,
        MeasurementKind::Angle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MeasurementKind::RelativePosition => "relative_position",
            MeasurementKind::Distance => "distance",
            MeasurementKind::RatioOfDistance => "ratio_of_distance",
            MeasurementKind::LocalBearing => "local_bearing",
            MeasurementKind::Angle => "angle",
        }
    }

    /// Whether the resulting constraints are also invariant to uniform scaling.
    pub fn is_scale_free(self) -> bool {
        !matches!(self, MeasurementKind::Distance | MeasurementKind::RelativePosition)
    }
}

impl fmt::Display for MeasurementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasurementKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relative_position" | "relative-position" | "position" => Ok(MeasurementKind::RelativePosition),
            "distance" => Ok(MeasurementKind::Distance),
            "ratio_of_distance" | "ratio-of-distance" | "ratio" => Ok(MeasurementKind::RatioOfDistance),
            "local_bearing" | "local-bearing" | "bearing" => Ok(MeasurementKind::LocalBearing),
            "angle" => Ok(MeasurementKind::Angle),
            other => Err(Error::Validation(format!("unknown measurement kind `{other}`"))),
        }
    }
}

/// Angle measured at `vertex` between the rays toward `a` and `b` (`a < b`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AngleKey {
    pub vertex: NodeId,
    pub a: NodeId,
    pub b: NodeId,
}

impl AngleKey {
    pub fn new(vertex: NodeId, a: NodeId, b: NodeId) -> Result<Self> {
        if vertex == a || vertex == b || a == b {
            return Err(Error::Validation(format!(
                "angle key ({vertex}; {a}, {b}) repeats a node"
            )));
        }
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        Ok(AngleKey { vertex, a, b })
    }
}

impl fmt::Display for AngleKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "angle at {} between {} and {}", self.vertex, self.a, self.b)
    }
}

/// Measurements of a single family over a network.
///
/// Directed families (`RelativePosition`, `LocalBearing`) are keyed by
/// `(observer, target)` and expressed in the observer's local frame.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasurementSet {
    RelativePosition(BTreeMap<(NodeId, NodeId), Vector3<f64>>),
    Distance(BTreeMap<Edge, f64>),
    /// Distances divided by the length of `reference`; its own entry is 1.
    RatioOfDistance {
        reference: Edge,
        ratios: BTreeMap<Edge, f64>,
    },
    LocalBearing(BTreeMap<(NodeId, NodeId), Vector3<f64>>),
    Angle(BTreeMap<AngleKey, f64>),
}

impl MeasurementSet {
    pub fn kind(&self) -> MeasurementKind {
        match self {
            MeasurementSet::RelativePosition(_) => MeasurementKind::RelativePosition,
            MeasurementSet::Distance(_) => MeasurementKind::Distance,
            MeasurementSet::RatioOfDistance { .. } => MeasurementKind::RatioOfDistance,
            MeasurementSet::LocalBearing(_) => MeasurementKind::LocalBearing,
            MeasurementSet::Angle(_) => MeasurementKind::Angle,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            MeasurementSet::RelativePosition(m) | MeasurementSet::LocalBearing(m) => m.len(),
            MeasurementSet::Distance(m) => m.len(),
            MeasurementSet::RatioOfDistance { ratios, .. } => ratios.len(),
            MeasurementSet::Angle(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MeasurementSet::RelativePosition(m) => {
                for (k, v) in m {
                    if !v.iter().all(|c| c.is_finite()) {
                        return Err(Error::Validation(format!(
                            "relative position {} -> {} is not finite",
                            k.0, k.1
                        )));
                    }
                }
            }
            MeasurementSet::Distance(m) => {
                for (e, &d) in m {
                    if !(d.is_finite() && d > 0.0) {
                        return Err(Error::Validation(format!("distance on {e} is {d}, must be > 0")));
                    }
                }
            }
            MeasurementSet::RatioOfDistance { reference, ratios } => {
                for (e, &r) in ratios {
                    if !(r.is_finite() && r > 0.0) {
                        return Err(Error::Validation(format!("ratio on {e} is {r}, must be > 0")));
                    }
                }
                if let Some(&r) = ratios.get(reference) {
                    if (r - 1.0).abs() > 1e-12 {
                        return Err(Error::Validation(format!(
                            "reference edge {reference} has ratio {r}, must be 1"
                        )));
                    }
                }
            }
            MeasurementSet::LocalBearing(m) => {
                for g in m.values() {
                    check_unit(g)?;
                }
            }
            MeasurementSet::Angle(m) => {
                for (k, &t) in m {
                    if !(0.0..=std::f64::consts::PI).contains(&t) {
                        return Err(Error::Validation(format!("{k} is {t}, must lie in [0, pi]")));
                    }
                }
            }
        }
        Ok(())
    }

    fn missing(&self, key: String) -> Error {
        Error::MissingMeasurement { kind: self.kind(), key }
    }

    fn expect_kind(&self, kind: MeasurementKind) -> Result<()> {
        if self.kind() != kind {
            return Err(Error::Unsupported(format!(
                "expected {kind} measurements, got {}",
                self.kind()
            )));
        }
        Ok(())
    }

    pub fn distance(&self, a: NodeId, b: NodeId) -> Result<f64> {
        self.expect_kind(MeasurementKind::Distance)?;
        let e = Edge::new(a, b)?;
        match self {
            MeasurementSet::Distance(m) => m.get(&e).copied().ok_or_else(|| self.missing(e.to_string())),
            _ => unreachable!(),
        }
    }

    pub fn ratio(&self, a: NodeId, b: NodeId) -> Result<f64> {
        self.expect_kind(MeasurementKind::RatioOfDistance)?;
        let e = Edge::new(a, b)?;
        match self {
            MeasurementSet::RatioOfDistance { ratios, .. } => {
                ratios.get(&e).copied().ok_or_else(|| self.missing(e.to_string()))
            }
            _ => unreachable!(),
        }
    }

    /// Bearing of `to` as seen from `from`, in `from`'s local frame.
    pub fn bearing(&self, from: NodeId, to: NodeId) -> Result<Vector3<f64>> {
        self.expect_kind(MeasurementKind::LocalBearing)?;
        match self {
            MeasurementSet::LocalBearing(m) => m
                .get(&(from, to))
                .copied()
                .ok_or_else(|| self.missing(format!("{from} -> {to}"))),
            _ => unreachable!(),
        }
    }

    /// Position of `to` relative to `from`, in `from`'s local frame.
    pub fn relative_position(&self, from: NodeId, to: NodeId) -> Result<Vector3<f64>> {
        self.expect_kind(MeasurementKind::RelativePosition)?;
        match self {
            MeasurementSet::RelativePosition(m) => m
                .get(&(from, to))
                .copied()
                .ok_or_else(|| self.missing(format!("{from} -> {to}"))),
            _ => unreachable!(),
        }
    }

    pub fn angle(&self, vertex: NodeId, a: NodeId, b: NodeId) -> Result<f64> {
        self.expect_kind(MeasurementKind::Angle)?;
        let key = AngleKey::new(vertex, a, b)?;
        match self {
            MeasurementSet::Angle(m) => m.get(&key).copied().ok_or_else(|| self.missing(key.to_string())),
            _ => unreachable!(),
        }
    }
}

/// Additive Gaussian noise levels, one per measurement family.
///
/// Bearings are perturbed by a Gaussian 3-vector and renormalized, so they
/// stay unit length. Relative positions get an additive Gaussian 3-vector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseSpec {
    pub distance_sigma: f64,
    pub angle_sigma: f64,
    pub bearing_sigma: f64,
    pub position_sigma: f64,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self::default()
    }

    /// The same sigma for every family.
    pub fn gaussian(sigma: f64) -> Self {
        NoiseSpec {
            distance_sigma: sigma,
            angle_sigma: sigma,
            bearing_sigma: sigma,
            position_sigma: sigma,
        }
    }

    fn validate(&self) -> Result<()> {
        for s in [
            self.distance_sigma,
            self.angle_sigma,
            self.bearing_sigma,
            self.position_sigma,
        ] {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::Validation(format!("noise sigma {s} must be finite and >= 0")));
            }
        }
        Ok(())
    }
}

fn gaussian_vector<R: Rng>(rng: &mut R, sigma: f64) -> Vector3<f64> {
    if sigma == 0.0 {
        return Vector3::zeros();
    }
    let x: f64 = rng.sample(StandardNormal);
    let y: f64 = rng.sample(StandardNormal);
    let z: f64 = rng.sample(StandardNormal);
    Vector3::new(x, y, z) * sigma
}

fn gaussian_scalar<R: Rng>(rng: &mut R, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    Normal::new(0.0, sigma).expect("sigma validated").sample(rng)
}

fn noisy_distance<R: Rng>(rng: &mut R, d: f64, sigma: f64) -> f64 {
    let v = (d + gaussian_scalar(rng, sigma)).abs();
    // keep the Distance invariant (> 0) under extreme draws
    if v > 0.0 {
        v
    } else {
        f64::MIN_POSITIVE
    }
}

/// Generate measurements of `kind` over every edge of `graph` from `truth`.
///
/// * distances and ratios: one value per undirected edge; ratios are taken
///   against the smallest edge of the graph.
/// * bearings and relative positions: one vector per directed edge, in the
///   observer's local frame.
/// * angles: at every node, one angle for every pair of its neighbors.
///
/// Output is a deterministic function of the inputs and `seed`.
pub fn synthesize_measurements(
    graph: &NetworkGraph,
    truth: &[Position3],
    kind: MeasurementKind,
    noise: &NoiseSpec,
    seed: u64,
) -> Result<MeasurementSet> {
    noise.validate()?;
    if truth.len() < graph.len() {
        return Err(Error::MissingPosition(NodeId(truth.len())));
    }
    let mut rng = seeded_rng(seed);
    let pos = |n: NodeId| &truth[n.0];

    let set = match kind {
        MeasurementKind::Distance => {
            let mut m = BTreeMap::new();
            for e in graph.edges() {
                let d = (pos(e.hi()) - pos(e.lo())).norm();
                m.insert(*e, noisy_distance(&mut rng, d, noise.distance_sigma));
            }
            MeasurementSet::Distance(m)
        }
        MeasurementKind::RatioOfDistance => {
            let reference =
                *graph.edges().iter().next().ok_or_else(|| {
                    Error::Unsupported("ratio-of-distance measurements need at least one edge".into())
                })?;
            let mut noisy = BTreeMap::new();
            for e in graph.edges() {
                let d = (pos(e.hi()) - pos(e.lo())).norm();
                noisy.insert(*e, noisy_distance(&mut rng, d, noise.distance_sigma));
            }
            let d_ref = noisy[&reference];
            let ratios = noisy.into_iter().map(|(e, d)| (e, d / d_ref)).collect();
            MeasurementSet::RatioOfDistance { reference, ratios }
        }
        MeasurementKind::LocalBearing => {
            let mut m = BTreeMap::new();
            for a in graph.nodes() {
                for &b in graph.neighbors(a) {
                    let g = relative_bearing(pos(a), pos(b))?;
                    let g = if noise.bearing_sigma > 0.0 {
                        (g + gaussian_vector(&mut rng, noise.bearing_sigma)).normalize()
                    } else {
                        g
                    };
                    m.insert((a, b), graph.frame(a).to_local(&g));
                }
            }
            MeasurementSet::LocalBearing(m)
        }
        MeasurementKind::RelativePosition => {
            let mut m = BTreeMap::new();
            for a in graph.nodes() {
                for &b in graph.neighbors(a) {
                    let e = pos(b) - pos(a) + gaussian_vector(&mut rng, noise.position_sigma);
                    m.insert((a, b), graph.frame(a).to_local(&e));
                }
            }
            MeasurementSet::RelativePosition(m)
        }
        MeasurementKind::Angle => {
            let mut m = BTreeMap::new();
            for v in graph.nodes() {
                let nb: Vec<NodeId> = graph.neighbors(v).iter().copied().collect();
                for (x, &a) in nb.iter().enumerate() {
                    for &b in &nb[x + 1..] {
                        let t = interior_angle(pos(v), pos(a), pos(b))?;
                        let t = (t + gaussian_scalar(&mut rng, noise.angle_sigma)).clamp(0.0, std::f64::consts::PI);
                        m.insert(AngleKey { vertex: v, a, b }, t);
                    }
                }
            }
            MeasurementSet::Angle(m)
        }
    };
    Ok(set)
}
