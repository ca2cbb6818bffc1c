use std::collections::BTreeSet;
use std::fmt;

use nalgebra::{Matrix3, Quaternion, UnitQuaternion, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;

use super::NodeId;
use crate::error::{Error, Result};

/// Undirected edge stored with its endpoints in increasing order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge(NodeId, NodeId);

impl Edge {
    pub fn new(a: NodeId, b: NodeId) -> Result<Self> {
        if a == b {
            return Err(Error::Validation(format!("self-edge at node {a}")));
        }
        Ok(if a < b { Edge(a, b) } else { Edge(b, a) })
    }

    pub fn lo(&self) -> NodeId {
        self.0
    }

    pub fn hi(&self) -> NodeId {
        self.1
    }

    pub fn contains(&self, n: NodeId) -> bool {
        self.0 == n || self.1 == n
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.0, self.1)
    }
}

/// Rotation from the global frame into a node's local measurement frame.
///
/// Local measurements relate to global ones by `g_local = Q g_global`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame {
    rotation: UnitQuaternion<f64>,
}

impl LocalFrame {
    pub fn identity() -> Self {
        LocalFrame {
            rotation: UnitQuaternion::identity(),
        }
    }

    /// Build from quaternion components `(w, x, y, z)`; the input is normalized.
    pub fn from_quaternion(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let q = Quaternion::new(w, x, y, z);
        let n = q.norm();
        if !n.is_finite() || n < 1e-12 {
            return Err(Error::Validation(format!(
                "frame quaternion ({w}, {x}, {y}, {z}) has no usable norm"
            )));
        }
        Ok(LocalFrame {
            rotation: UnitQuaternion::new_normalize(q),
        })
    }

    /// Uniform sample from SO(3): a normalized 4-D Gaussian quaternion.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let c: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
            if let Ok(frame) = Self::from_quaternion(c[0], c[1], c[2], c[3]) {
                return frame;
            }
        }
    }

    /// Quaternion components `(w, x, y, z)`.
    pub fn quaternion(&self) -> [f64; 4] {
        let q = self.rotation.quaternion();
        [q.w, q.i, q.j, q.k]
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        self.rotation.to_rotation_matrix().into_inner()
    }

    /// Express a global-frame vector in this local frame.
    pub fn to_local(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * v
    }

    pub fn to_global(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.inverse() * v
    }
}

impl Default for LocalFrame {
    fn default() -> Self {
        Self::identity()
    }
}

/// Nodes `0..n`, an anchor/free partition, undirected edges and one local
/// frame per node.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGraph {
    anchors: BTreeSet<NodeId>,
    edges: BTreeSet<Edge>,
    adjacency: Vec<BTreeSet<NodeId>>,
    frames: Vec<LocalFrame>,
}

impl NetworkGraph {
    pub fn new(
        n: usize,
        anchors: impl IntoIterator<Item = NodeId>,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<Self> {
        let mut graph = NetworkGraph {
            anchors: BTreeSet::new(),
            edges: BTreeSet::new(),
            adjacency: vec![BTreeSet::new(); n],
            frames: vec![LocalFrame::identity(); n],
        };
        for a in anchors {
            graph.check_node(a)?;
            graph.anchors.insert(a);
        }
        for (a, b) in edges {
            graph.add_edge(a, b)?;
        }
        Ok(graph)
    }

    pub fn with_frames(mut self, frames: Vec<LocalFrame>) -> Result<Self> {
        if frames.len() != self.len() {
            return Err(Error::Validation(format!(
                "{} frames supplied for {} nodes",
                frames.len(),
                self.len()
            )));
        }
        self.frames = frames;
        Ok(self)
    }

    pub fn add_edge(&mut self, a: NodeId, b: NodeId) -> Result<()> {
        self.check_node(a)?;
        self.check_node(b)?;
        let e = Edge::new(a, b)?;
        self.edges.insert(e);
        self.adjacency[a.0].insert(b);
        self.adjacency[b.0].insert(a);
        Ok(())
    }

    fn check_node(&self, a: NodeId) -> Result<()> {
        if a.0 >= self.len() {
            return Err(Error::NodeOutOfRange { node: a, n: self.len() });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.len()).map(NodeId)
    }

    pub fn anchors(&self) -> &BTreeSet<NodeId> {
        &self.anchors
    }

    pub fn free_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes().filter(|n| !self.anchors.contains(n))
    }

    pub fn is_anchor(&self, n: NodeId) -> bool {
        self.anchors.contains(&n)
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        a != b && self.adjacency.get(a.0).is_some_and(|s| s.contains(&b))
    }

    pub fn neighbors(&self, n: NodeId) -> &BTreeSet<NodeId> {
        &self.adjacency[n.0]
    }

    pub fn degree(&self, n: NodeId) -> usize {
        self.adjacency[n.0].len()
    }

    pub fn frame(&self, n: NodeId) -> &LocalFrame {
        &self.frames[n.0]
    }

    pub fn frames(&self) -> &[LocalFrame] {
        &self.frames
    }

    /// All triples `a < b < c` whose three edges are present.
    pub fn triangles(&self) -> Vec<[NodeId; 3]> {
        let mut out = Vec::new();
        for a in self.nodes() {
            for &b in self.neighbors(a).range(NodeId(a.0 + 1)..) {
                for &c in self.neighbors(b).range(NodeId(b.0 + 1)..) {
                    if self.has_edge(a, c) {
                        out.push([a, b, c]);
                    }
                }
            }
        }
        out
    }
}
