#![allow(dead_code)]

use std::collections::BTreeMap;

use netloc_core::constraints::{build_all, enumerate_tuples_capped, BuilderConfig};
use netloc_core::geom::{
    random_frames, random_geometric_edges, random_positions, seeded_rng, synthesize_measurements, MeasurementKind,
    NetworkGraph, NodeId, NoiseSpec, Position3,
};
use netloc_core::localization::{assemble, StackedConstraintSystem};

pub struct Scenario {
    pub graph: NetworkGraph,
    pub truth: Vec<Position3>,
}

impl Scenario {
    /// `anchors` nodes first, pairwise connected, then random-geometric edges.
    pub fn random(n: usize, anchors: usize, radius: f64, coplanar: bool, seed: u64) -> Scenario {
        let mut rng = seeded_rng(seed);
        let truth = random_positions(n, coplanar, &mut rng);
        let mut edges = random_geometric_edges(&truth, radius);
        for a in 0..anchors {
            for b in a + 1..anchors {
                edges.push((NodeId(a), NodeId(b)));
            }
        }
        let frames = random_frames(n, &mut rng);
        let graph = NetworkGraph::new(n, (0..anchors).map(NodeId), edges)
            .unwrap()
            .with_frames(frames)
            .unwrap();
        Scenario { graph, truth }
    }

    pub fn anchors(&self) -> BTreeMap<NodeId, Position3> {
        self.graph.anchors().iter().map(|&a| (a, self.truth[a.0])).collect()
    }

    pub fn free(&self) -> Vec<NodeId> {
        self.graph.free_nodes().collect()
    }

    pub fn system(
        &self,
        kind: MeasurementKind,
        coplanar: bool,
        noise: &NoiseSpec,
        config: &BuilderConfig,
        seed: u64,
    ) -> StackedConstraintSystem {
        let meas = synthesize_measurements(&self.graph, &self.truth, kind, noise, seed).unwrap();
        let tuples = enumerate_tuples_capped(&self.graph, kind, coplanar, Some(12));
        let built: Vec<_> = build_all(&tuples, &meas, config)
            .into_iter()
            .filter_map(|r| r.ok())
            .collect();
        assemble(built, self.graph.len()).unwrap()
    }
}
