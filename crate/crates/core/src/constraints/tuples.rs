use std::fmt;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::geom::{MeasurementKind, NetworkGraph, NodeId};

/// A center node and its strictly increasing neighbor list.
///
/// Four neighbors for 3-D networks, three in coplanar mode; the first
/// neighbor doubles as the pivot of the bearing reduction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConstraintTuple {
    pub center: NodeId,
    pub neighbors: Vec<NodeId>,
}

impl ConstraintTuple {
    pub fn new(center: NodeId, neighbors: Vec<NodeId>) -> Result<Self> {
        if neighbors.len() < 2 {
            return Err(Error::Validation(format!(
                "tuple needs at least two neighbors, got {}",
                neighbors.len()
            )));
        }
        if !neighbors.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Validation(format!(
                "neighbors {neighbors:?} are not strictly increasing"
            )));
        }
        if neighbors.contains(&center) {
            return Err(Error::Validation(format!("center {center} listed as its own neighbor")));
        }
        Ok(ConstraintTuple { center, neighbors })
    }

    /// Center followed by the neighbors.
    pub fn nodes(&self) -> Vec<NodeId> {
        std::iter::once(self.center)
            .chain(self.neighbors.iter().copied())
            .collect()
    }

    pub fn is_coplanar(&self) -> bool {
        self.neighbors.len() == 3
    }

    /// Intrinsic dimension of the tuple's configuration.
    pub fn dim(&self) -> usize {
        self.neighbors.len() - 1
    }
}

impl fmt::Display for ConstraintTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}; {})", self.center, self.neighbors.iter().join(", "))
    }
}

/// Edges a tuple must have for the given family.
///
/// * relative position: center to every neighbor;
/// * local bearing: center to every neighbor, plus the first neighbor to
///   every other neighbor;
/// * distance, ratio of distance and angle: every pair of tuple nodes.
pub fn required_edges(kind: MeasurementKind, center: NodeId, neighbors: &[NodeId]) -> Vec<(NodeId, NodeId)> {
    let mut out: Vec<(NodeId, NodeId)> = neighbors.iter().map(|&n| (center, n)).collect();
    match kind {
        MeasurementKind::RelativePosition => {}
        MeasurementKind::LocalBearing => {
            let pivot = neighbors[0];
            out.extend(neighbors[1..].iter().map(|&n| (pivot, n)));
        }
        MeasurementKind::Distance | MeasurementKind::RatioOfDistance | MeasurementKind::Angle => {
            out.extend(neighbors.iter().tuple_combinations().map(|(&a, &b)| (a, b)));
        }
    }
    out
}

pub fn satisfies_pattern(graph: &NetworkGraph, kind: MeasurementKind, center: NodeId, neighbors: &[NodeId]) -> bool {
    required_edges(kind, center, neighbors)
        .into_iter()
        .all(|(a, b)| graph.has_edge(a, b))
}

/// Every tuple of `graph` whose edge pattern suits `kind`, in lexicographic
/// order of `(center, neighbors)`.
pub fn enumerate_tuples(graph: &NetworkGraph, kind: MeasurementKind, coplanar: bool) -> Vec<ConstraintTuple> {
    enumerate_tuples_capped(graph, kind, coplanar, None)
}

/// As [`enumerate_tuples`], keeping at most `max_per_center` tuples per center.
pub fn enumerate_tuples_capped(
    graph: &NetworkGraph,
    kind: MeasurementKind,
    coplanar: bool,
    max_per_center: Option<usize>,
) -> Vec<ConstraintTuple> {
    let size = if coplanar { 3 } else { 4 };
    let cap = max_per_center.unwrap_or(usize::MAX);
    let mut out = Vec::new();
    for center in graph.nodes() {
        let found = graph
            .neighbors(center)
            .iter()
            .copied()
            .combinations(size)
            .filter(|nb| satisfies_pattern(graph, kind, center, nb))
            .take(cap)
            .map(|neighbors| ConstraintTuple { center, neighbors });
        out.extend(found);
    }
    out
}
