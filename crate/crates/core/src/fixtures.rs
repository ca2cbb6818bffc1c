//! Small hand-placed network used as an end-to-end fixture.
//!
//! The topology loosely follows a published ten-node illustration whose
//! coordinates were never given; the positions below are made up and only
//! approximate its layout.

use crate::geom::{NetworkGraph, NodeId, Position3};

pub const SAMPLE_NODES: usize = 10;

/// Non-coplanar anchor set of [`sample_network`].
pub const SAMPLE_ANCHORS: [usize; 4] = [0, 1, 2, 3];

pub fn sample_positions() -> Vec<Position3> {
    [
        [0.0, 0.0, 0.0],
        [2.0, 0.1, 0.0],
        [0.9, 1.8, 0.2],
        [1.0, 0.7, 1.6],
        [1.1, 0.6, 0.4],
        [2.6, 1.3, 0.5],
        [-0.5, 1.2, 0.7],
        [1.8, 2.1, 1.2],
        [0.2, 0.4, 1.3],
        [2.3, 0.2, 1.4],
    ]
    .into_iter()
    .map(|[x, y, z]| Position3::new(x, y, z))
    .collect()
}

#[rustfmt::skip]
pub const SAMPLE_EDGES: [(usize, usize); 29] = [
    (0, 1), (0, 2), (0, 3), (0, 4), (0, 6), (0, 8),
    (1, 2), (1, 3), (1, 4), (1, 5), (1, 9),
    (2, 3), (2, 4), (2, 5), (2, 6), (2, 7),
    (3, 4), (3, 7), (3, 8), (3, 9),
    (4, 5), (4, 6), (4, 8), (4, 9),
    (5, 7), (5, 9),
    (6, 8), (7, 9), (6, 7),
];

pub fn sample_network() -> NetworkGraph {
    NetworkGraph::new(
        SAMPLE_NODES,
        SAMPLE_ANCHORS.map(NodeId),
        SAMPLE_EDGES.iter().map(|&(a, b)| (NodeId(a), NodeId(b))),
    )
    .expect("fixture edges are valid")
}
