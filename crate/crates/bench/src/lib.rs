//! Shared scenario setup for the benchmarks.

use netloc_core::prelude::*;

pub struct BenchNetwork {
    pub graph: NetworkGraph,
    pub truth: Vec<Position3>,
}

/// Random geometric network with a 4-anchor clique, regenerated until
/// every free node sits in at least one distance tuple.
pub fn network(nodes: usize, radius: f64, seed: u64) -> BenchNetwork {
    for attempt in 0.. {
        let mut rng = seeded_rng(seed.wrapping_add(attempt));
        let truth = random_positions(nodes, false, &mut rng);
        let mut edges = random_geometric_edges(&truth, radius);
        for a in 0..4 {
            for b in a + 1..4 {
                edges.push((NodeId(a), NodeId(b)));
            }
        }
        edges.sort();
        edges.dedup();
        let Ok(graph) = NetworkGraph::new(nodes, (0..4).map(NodeId), edges) else {
            continue;
        };
        let tuples = enumerate_tuples_capped(&graph, MeasurementKind::Distance, false, Some(12));
        let covered = graph
            .free_nodes()
            .all(|v| tuples.iter().any(|t| t.nodes().contains(&v)));
        if covered {
            return BenchNetwork { graph, truth };
        }
    }
    unreachable!()
}

impl BenchNetwork {
    pub fn system(&self, kind: MeasurementKind) -> StackedConstraintSystem {
        let meas = synthesize_measurements(&self.graph, &self.truth, kind, &NoiseSpec::none(), 0).unwrap();
        let tuples = enumerate_tuples_capped(&self.graph, kind, false, Some(12));
        let built = build_all(&tuples, &meas, &BuilderConfig::default())
            .into_iter()
            .filter_map(|c| c.ok());
        assemble(built, self.graph.len()).unwrap()
    }

    pub fn anchors(&self) -> std::collections::BTreeMap<NodeId, Position3> {
        self.graph.anchors().iter().map(|&a| (a, self.truth[a.0])).collect()
    }
}
