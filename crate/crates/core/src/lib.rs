//! Localization of 3-D networks from displacement constraints.
//!
//! Each measurement family (relative positions, distances, distance ratios,
//! local bearings, angles) is reduced to linear constraints
//! `sum_n mu_n (p_n - p_i) = 0` on small node tuples. The constraints are
//! stacked into `B p = 0` and solved with a few anchors fixed.
//!
//! ```
//! use netloc_core::prelude::*;
//!
//! let mut rng = seeded_rng(7);
//! let truth = random_positions(5, false, &mut rng);
//! let edges = (0..5).flat_map(|a| (a + 1..5).map(move |b| (a, b)));
//! let graph = NetworkGraph::new(5, (0..4).map(NodeId), edges.map(|(a, b)| (NodeId(a), NodeId(b)))).unwrap();
//! let meas = synthesize_measurements(&graph, &truth, MeasurementKind::Distance, &NoiseSpec::none(), 1).unwrap();
//! let tuple = ConstraintTuple::new(NodeId(4), vec![NodeId(0), NodeId(1), NodeId(2), NodeId(3)]).unwrap();
//! let c = build_constraint(&tuple, &meas, &BuilderConfig::default()).unwrap();
//! assert!(c.relative_residual(&truth) < 1e-8);
//! ```

pub mod angle_params;
pub mod constraints;
pub mod error;
pub mod fixtures;
pub mod geom;
pub mod localization;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::angle_params::{AngleParameterSet, CaseLabel, TriangleAngles};
    pub use crate::constraints::{
        build_all, build_constraint, enumerate_tuples, enumerate_tuples_capped, BuilderConfig, ConstraintTuple,
        DisplacementConstraint,
    };
    pub use crate::error::{Error, Result};
    pub use crate::geom::{
        random_frames, random_geometric_edges, random_positions, seeded_rng, synthesize_measurements, Edge, LocalFrame,
        MeasurementKind, MeasurementSet, NetworkGraph, NodeId, NoiseSpec, Position3,
    };
    pub use crate::localization::{
        assemble, rmse, solve_distributed, solve_global, DistributedParams, SolveReport, StackedConstraintSystem,
    };
}
