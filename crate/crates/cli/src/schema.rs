//! On-disk formats: network JSON, constraints JSON and positions CSV.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::Vector3;
use netloc_core::constraints::DisplacementConstraint;
use netloc_core::geom::{AngleKey, Edge, LocalFrame, MeasurementKind, MeasurementSet, NetworkGraph, NodeId, Position3};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Anchor,
    Free,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: usize,
    pub role: Role,
    /// Ground truth; required for anchors, whose position it fixes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<[f64; 3]>,
    /// Local frame as a unit quaternion `[w, x, y, z]`.
    #[serde(default = "identity_quaternion")]
    pub frame: [f64; 4],
}

fn identity_quaternion() -> [f64; 4] {
    [1.0, 0.0, 0.0, 0.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairValue {
    pub a: usize,
    pub b: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectedVector {
    pub from: usize,
    pub to: usize,
    pub value: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleValue {
    pub vertex: usize,
    pub a: usize,
    pub b: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasurementsRecord {
    RelativePosition {
        records: Vec<DirectedVector>,
    },
    Distance {
        records: Vec<PairValue>,
    },
    RatioOfDistance {
        reference: [usize; 2],
        records: Vec<PairValue>,
    },
    LocalBearing {
        records: Vec<DirectedVector>,
    },
    Angle {
        records: Vec<AngleValue>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    /// Free-form provenance, e.g. the generator configuration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measurements: Option<MeasurementsRecord>,
}

fn node(id: usize, n: usize) -> Result<NodeId, CliError> {
    if id >= n {
        return Err(CliError::validation(format!(
            "node {id} is not declared (network has {n} nodes)"
        )));
    }
    Ok(NodeId(id))
}

fn vec3(v: [f64; 3]) -> Vector3<f64> {
    Vector3::new(v[0], v[1], v[2])
}

fn arr3(v: &Vector3<f64>) -> [f64; 3] {
    [v.x, v.y, v.z]
}

impl NetworkFile {
    pub fn from_parts(
        graph: &NetworkGraph,
        truth: Option<&[Position3]>,
        measurements: Option<&MeasurementSet>,
        meta: Option<serde_json::Value>,
    ) -> Self {
        let nodes = graph
            .nodes()
            .map(|v| NodeRecord {
                id: v.0,
                role: if graph.is_anchor(v) { Role::Anchor } else { Role::Free },
                truth: truth.map(|t| [t[v.0].x, t[v.0].y, t[v.0].z]),
                frame: graph.frame(v).quaternion(),
            })
            .collect();
        let edges = graph.edges().iter().map(|e| [e.lo().0, e.hi().0]).collect();
        NetworkFile {
            meta,
            nodes,
            edges,
            measurements: measurements.map(MeasurementsRecord::from_set),
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::validation(format!("network file: {e}")))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("network file serializes");
        s.push('\n');
        s
    }

    /// Node records must be exactly `0..n` in order.
    fn check_ids(&self) -> Result<(), CliError> {
        for (i, rec) in self.nodes.iter().enumerate() {
            if rec.id != i {
                return Err(CliError::validation(format!(
                    "node ids must be 0..{} in order; found {} at position {i}",
                    self.nodes.len(),
                    rec.id
                )));
            }
        }
        Ok(())
    }

    pub fn graph(&self) -> Result<NetworkGraph, CliError> {
        self.check_ids()?;
        let n = self.nodes.len();
        let anchors = self
            .nodes
            .iter()
            .filter(|r| r.role == Role::Anchor)
            .map(|r| NodeId(r.id));
        let mut edges = Vec::with_capacity(self.edges.len());
        for &[a, b] in &self.edges {
            edges.push((node(a, n)?, node(b, n)?));
        }
        let frames = self
            .nodes
            .iter()
            .map(|r| {
                let [w, x, y, z] = r.frame;
                LocalFrame::from_quaternion(w, x, y, z)
                    .map_err(|e| CliError::from_core(e).context(format!("node {}", r.id)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        NetworkGraph::new(n, anchors, edges)
            .and_then(|g| g.with_frames(frames))
            .map_err(CliError::from_core)
    }

    /// Truth for every node, if all nodes carry one.
    pub fn truth(&self) -> Option<Vec<Position3>> {
        self.nodes
            .iter()
            .map(|r| r.truth.map(|[x, y, z]| Position3::new(x, y, z)))
            .collect()
    }

    /// Known anchor positions; every anchor must carry one.
    pub fn anchor_positions(&self) -> Result<BTreeMap<NodeId, Position3>, CliError> {
        let mut out = BTreeMap::new();
        for r in self.nodes.iter().filter(|r| r.role == Role::Anchor) {
            let [x, y, z] = r
                .truth
                .ok_or_else(|| CliError::validation(format!("anchor {} has no position", r.id)))?;
            out.insert(NodeId(r.id), Position3::new(x, y, z));
        }
        if out.is_empty() {
            return Err(CliError::validation("network declares no anchor nodes".to_string()));
        }
        Ok(out)
    }

    pub fn measurement_set(&self) -> Result<Option<MeasurementSet>, CliError> {
        let n = self.nodes.len();
        self.measurements.as_ref().map(|m| m.to_set(n)).transpose()
    }
}

impl MeasurementsRecord {
    pub fn kind(&self) -> MeasurementKind {
        match self {
            MeasurementsRecord::RelativePosition { .. } => MeasurementKind::RelativePosition,
            MeasurementsRecord::Distance { .. } => MeasurementKind::Distance,
            MeasurementsRecord::RatioOfDistance { .. } => MeasurementKind::RatioOfDistance,
            MeasurementsRecord::LocalBearing { .. } => MeasurementKind::LocalBearing,
            MeasurementsRecord::Angle { .. } => MeasurementKind::Angle,
        }
    }

    pub fn from_set(set: &MeasurementSet) -> Self {
        let pairs = |m: &BTreeMap<Edge, f64>| {
            m.iter()
                .map(|(e, &value)| PairValue {
                    a: e.lo().0,
                    b: e.hi().0,
                    value,
                })
                .collect()
        };
        let directed = |m: &BTreeMap<(NodeId, NodeId), Vector3<f64>>| {
            m.iter()
                .map(|(&(from, to), v)| DirectedVector {
                    from: from.0,
                    to: to.0,
                    value: arr3(v),
                })
                .collect()
        };
        match set {
            MeasurementSet::RelativePosition(m) => MeasurementsRecord::RelativePosition { records: directed(m) },
            MeasurementSet::Distance(m) => MeasurementsRecord::Distance { records: pairs(m) },
            MeasurementSet::RatioOfDistance { reference, ratios } => MeasurementsRecord::RatioOfDistance {
                reference: [reference.lo().0, reference.hi().0],
                records: pairs(ratios),
            },
            MeasurementSet::LocalBearing(m) => MeasurementsRecord::LocalBearing { records: directed(m) },
            MeasurementSet::Angle(m) => MeasurementsRecord::Angle {
                records: m
                    .iter()
                    .map(|(k, &value)| AngleValue {
                        vertex: k.vertex.0,
                        a: k.a.0,
                        b: k.b.0,
                        value,
                    })
                    .collect(),
            },
        }
    }

    pub fn to_set(&self, n: usize) -> Result<MeasurementSet, CliError> {
        let pairs = |records: &[PairValue]| -> Result<BTreeMap<Edge, f64>, CliError> {
            let mut m = BTreeMap::new();
            for r in records {
                let e = Edge::new(node(r.a, n)?, node(r.b, n)?).map_err(CliError::from_core)?;
                m.insert(e, r.value);
            }
            Ok(m)
        };
        let directed = |records: &[DirectedVector]| -> Result<BTreeMap<(NodeId, NodeId), Vector3<f64>>, CliError> {
            let mut m = BTreeMap::new();
            for r in records {
                m.insert((node(r.from, n)?, node(r.to, n)?), vec3(r.value));
            }
            Ok(m)
        };
        let set = match self {
            MeasurementsRecord::RelativePosition { records } => MeasurementSet::RelativePosition(directed(records)?),
            MeasurementsRecord::Distance { records } => MeasurementSet::Distance(pairs(records)?),
            MeasurementsRecord::RatioOfDistance { reference, records } => MeasurementSet::RatioOfDistance {
                reference: Edge::new(node(reference[0], n)?, node(reference[1], n)?).map_err(CliError::from_core)?,
                ratios: pairs(records)?,
            },
            MeasurementsRecord::LocalBearing { records } => MeasurementSet::LocalBearing(directed(records)?),
            MeasurementsRecord::Angle { records } => {
                let mut m = BTreeMap::new();
                for r in records {
                    let key =
                        AngleKey::new(node(r.vertex, n)?, node(r.a, n)?, node(r.b, n)?).map_err(CliError::from_core)?;
                    m.insert(key, r.value);
                }
                MeasurementSet::Angle(m)
            }
        };
        set.validate().map_err(CliError::from_core)?;
        Ok(set)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintRecord {
    pub center: usize,
    pub neighbors: Vec<usize>,
    pub mu: Vec<f64>,
    #[serde(default)]
    pub degenerate: bool,
    /// Relative residual on the embedded truth, when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedTuple {
    pub center: usize,
    pub neighbors: Vec<usize>,
    pub error: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintsFile {
    pub kind: String,
    pub coplanar: bool,
    pub constraints: Vec<ConstraintRecord>,
    #[serde(default)]
    pub skipped: Vec<SkippedTuple>,
}

impl ConstraintRecord {
    pub fn from_constraint(c: &DisplacementConstraint, truth: Option<&[Position3]>) -> Self {
        ConstraintRecord {
            center: c.center.0,
            neighbors: c.neighbors.iter().map(|v| v.0).collect(),
            mu: c.mu.clone(),
            degenerate: c.degenerate,
            residual: truth.map(|t| c.relative_residual(t)),
        }
    }

    pub fn to_constraint(&self, n: usize) -> Result<DisplacementConstraint, CliError> {
        let center = node(self.center, n)?;
        let neighbors = self
            .neighbors
            .iter()
            .map(|&v| node(v, n))
            .collect::<Result<Vec<_>, _>>()?;
        DisplacementConstraint::new(center, neighbors, self.mu.clone(), self.degenerate).map_err(CliError::from_core)
    }

    pub fn label(&self) -> String {
        let nb: Vec<String> = self.neighbors.iter().map(|v| v.to_string()).collect();
        format!("({}; {})", self.center, nb.join(", "))
    }
}

impl ConstraintsFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::validation(format!("constraints file: {e}")))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("constraints file serializes");
        s.push('\n');
        s
    }

    pub fn constraints(&self, n: usize) -> Result<Vec<DisplacementConstraint>, CliError> {
        self.constraints.iter().map(|c| c.to_constraint(n)).collect()
    }
}

/// `node_id,x,y,z,err`; `err` is the distance to truth, empty without one.
pub fn positions_csv(positions: &[Position3], truth: Option<&[Position3]>) -> String {
    let mut out = String::from("node_id,x,y,z,err\n");
    for (i, p) in positions.iter().enumerate() {
        write!(out, "{i},{:.16e},{:.16e},{:.16e},", p.x, p.y, p.z).unwrap();
        if let Some(t) = truth {
            write!(out, "{:.16e}", (p - t[i]).norm()).unwrap();
        }
        out.push('\n');
    }
    out
}
