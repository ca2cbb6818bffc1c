//! Seeded synthetic scenarios.

use netloc_core::constraints::{enumerate_tuples_capped, ConstraintTuple};
use netloc_core::geom::{
    random_frames, random_geometric_edges, random_positions, seeded_rng, MeasurementKind, NetworkGraph, NodeId,
    Position3,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, ExitKind};

fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |a| (a + 1..n).map(move |b| (a, b)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum GraphModel {
    Complete,
    RandomGeometric { radius: f64 },
    Explicit { edges: Vec<[usize; 2]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub nodes: usize,
    pub anchors: usize,
    pub graph: GraphModel,
    pub kind: MeasurementKindName,
    pub coplanar: bool,
    pub noise_sigma: f64,
    pub seed: u64,
    /// Upper bound on tuples per center node.
    pub max_tuples_per_node: Option<usize>,
    /// Fresh draws allowed before giving up on the assumptions.
    pub max_attempts: usize,
}

/// Serde wrapper for [`MeasurementKind`] using its snake_case name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasurementKindName(pub MeasurementKind);

impl Serialize for MeasurementKindName {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.0.name())
    }
}

impl<'de> Deserialize<'de> for MeasurementKindName {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map(MeasurementKindName).map_err(serde::de::Error::custom)
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            nodes: 34,
            anchors: 4,
            graph: GraphModel::RandomGeometric { radius: 0.7 },
            kind: MeasurementKindName(MeasurementKind::Distance),
            coplanar: false,
            noise_sigma: 0.0,
            seed: 0,
            max_tuples_per_node: Some(12),
            max_attempts: 64,
        }
    }
}

impl ScenarioConfig {
    pub fn kind(&self) -> MeasurementKind {
        self.kind.0
    }

    /// Neighbors each node needs: four in 3-D, three in coplanar mode.
    pub fn min_degree(&self) -> usize {
        if self.coplanar {
            3
        } else {
            4
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |m: String| Err(CliError::validation(m));
        if self.nodes == 0 {
            return fail("node count must be positive".into());
        }
        if self.anchors < 2 {
            return fail(format!("anchor count {} < 2", self.anchors));
        }
        if self.anchors > self.nodes {
            return fail(format!(
                "anchor count {} exceeds node count {}",
                self.anchors, self.nodes
            ));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return fail(format!("noise sigma {} must be finite and >= 0", self.noise_sigma));
        }
        if self.max_attempts == 0 {
            return fail("max_attempts must be positive".into());
        }
        if self.max_tuples_per_node == Some(0) {
            return fail("max_tuples_per_node must be positive".into());
        }
        match &self.graph {
            GraphModel::RandomGeometric { radius } if !(radius.is_finite() && *radius > 0.0) => {
                fail(format!("radius {radius} must be > 0"))
            }
            GraphModel::Explicit { edges } => match edges
                .iter()
                .find(|[a, b]| a == b || *a >= self.nodes || *b >= self.nodes)
            {
                Some(e) => fail(format!("explicit edge {e:?} is invalid for {} nodes", self.nodes)),
                None => Ok(()),
            },
            _ => Ok(()),
        }
    }

    pub fn tuples(&self, graph: &NetworkGraph) -> Vec<ConstraintTuple> {
        enumerate_tuples_capped(graph, self.kind(), self.coplanar, self.max_tuples_per_node)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub graph: NetworkGraph,
    pub truth: Vec<Position3>,
    /// Zero-based index of the accepted draw.
    pub attempt: usize,
}

/// Seed of draw `attempt`, spread so retries never collide with other seeds'
/// first draws in practice.
fn attempt_seed(seed: u64, attempt: usize) -> u64 {
    seed ^ (attempt as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn draw(config: &ScenarioConfig, attempt: usize) -> Result<Scenario, CliError> {
    let mut rng = seeded_rng(attempt_seed(config.seed, attempt));
    let truth = random_positions(config.nodes, config.coplanar, &mut rng);
    let mut edges: Vec<(NodeId, NodeId)> = match &config.graph {
        GraphModel::Complete => pairs(config.nodes).map(|(a, b)| (NodeId(a), NodeId(b))).collect(),
        GraphModel::RandomGeometric { radius } => random_geometric_edges(&truth, *radius),
        GraphModel::Explicit { edges } => edges.iter().map(|&[a, b]| (NodeId(a), NodeId(b))).collect(),
    };
    // anchors form a clique so each sees the others
    edges.extend(pairs(config.anchors).map(|(a, b)| (NodeId(a), NodeId(b))));
    let frames = random_frames(config.nodes, &mut rng);
    let graph = NetworkGraph::new(config.nodes, (0..config.anchors).map(NodeId), edges)
        .and_then(|g| g.with_frames(frames))
        .map_err(CliError::from_core)?;
    Ok(Scenario { graph, truth, attempt })
}

/// First violated assumption of a candidate network, if any.
fn violation(config: &ScenarioConfig, sc: &Scenario) -> Option<(String, String)> {
    let need = config.min_degree();
    if let Some(v) = sc.graph.free_nodes().find(|&v| sc.graph.degree(v) < need) {
        return Some((
            format!("free node with < {need} neighbors"),
            format!("node {v} has {} neighbors", sc.graph.degree(v)),
        ));
    }
    let tuples = config.tuples(&sc.graph);
    let mut covered = vec![false; config.nodes];
    for t in &tuples {
        for v in t.nodes() {
            covered[v.0] = true;
        }
    }
    if let Some(v) = sc.graph.free_nodes().find(|v| !covered[v.0]) {
        return Some((
            format!("free node outside every {} tuple", config.kind()),
            format!("node {v} has no admissible tuple"),
        ));
    }
    None
}

/// Draw networks until the family's assumptions hold or the budget runs out.
pub fn generate(config: &ScenarioConfig) -> Result<Scenario, CliError> {
    config.validate()?;
    let mut last = None;
    for attempt in 0..config.max_attempts {
        let sc = draw(config, attempt)?;
        match violation(config, &sc) {
            None => return Ok(sc),
            Some(v) => last = Some(v),
        }
        if !matches!(config.graph, GraphModel::RandomGeometric { .. }) && last.is_some() {
            // the topology does not change between draws
            break;
        }
    }
    let (assumption, detail) = last.expect("at least one attempt");
    Err(CliError::new(
        ExitKind::Validation,
        "assumption_violated",
        format!("{assumption} ({detail})"),
    )
    .with_details(
        serde_json::json!({ "assumption": assumption, "attempts": config.max_attempts, "kind": config.kind().name() }),
    ))
}
