//! Displacement constraints `sum_n mu_n (p_n - p_center) = 0` built from
//! each measurement family.

mod builders;
pub mod mds;
pub mod nullspace;
mod tuples;

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{MeasurementSet, NodeId, Position3};

pub use builders::{
    build_constraint, displacement_from_angles, displacement_from_bearing, displacement_from_distance,
    displacement_from_ratio, displacement_from_relative_position, ratio_matrix_from_angles,
};
pub use mds::{mds_embed, DistanceMatrix, Embedding, RatioMatrix};
pub use nullspace::{canonicalize, null_coefficients, NullSpace};
pub use tuples::{enumerate_tuples, enumerate_tuples_capped, required_edges, satisfies_pattern, ConstraintTuple};

/// Numerical knobs shared by all builders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuilderConfig {
    /// Relative singular-value threshold for counting null-space dimensions.
    pub rank_tol: f64,
    /// Relative eigenvalue threshold for MDS realizability; `None` disables it.
    pub embed_tol: Option<f64>,
    /// `|sin|` below this is treated as a colinear triple.
    pub colinear_sine: f64,
    /// Maximum relative spread between ratio chains of the angle builder.
    pub angle_consistency_tol: f64,
    /// Reject degenerate tuples instead of flagging them.
    pub strict: bool,
}

impl Default for BuilderConfig {
    fn default() -> Self {
        BuilderConfig {
            rank_tol: 1e-8,
            embed_tol: Some(1e-8),
            colinear_sine: 1e-7,
            angle_consistency_tol: 1e-6,
            strict: false,
        }
    }
}

impl BuilderConfig {
    /// Settings for noisy measurements: MDS keeps the best low-rank fit and
    /// angle chains may disagree by the noise level.
    pub fn noisy() -> Self {
        BuilderConfig {
            embed_tol: None,
            angle_consistency_tol: f64::INFINITY,
            ..Self::default()
        }
    }
}

/// `sum_n mu_n (p_n - p_center) = 0` with `||mu|| = 1` and the first
/// nonzero coefficient positive.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementConstraint {
    pub center: NodeId,
    pub neighbors: Vec<NodeId>,
    pub mu: Vec<f64>,
    /// The null space behind `mu` had dimension > 1.
    pub degenerate: bool,
}

impl DisplacementConstraint {
    pub fn new(center: NodeId, neighbors: Vec<NodeId>, mu: Vec<f64>, degenerate: bool) -> Result<Self> {
        if neighbors.len() != mu.len() {
            return Err(Error::Validation(format!(
                "{} coefficients for {} neighbors",
                mu.len(),
                neighbors.len()
            )));
        }
        if !mu.iter().all(|m| m.is_finite()) {
            return Err(Error::Validation(format!("non-finite coefficients {mu:?}")));
        }
        Ok(DisplacementConstraint {
            center,
            neighbors,
            mu,
            degenerate,
        })
    }

    pub fn tuple(&self) -> ConstraintTuple {
        ConstraintTuple {
            center: self.center,
            neighbors: self.neighbors.clone(),
        }
    }

    /// `sum_n mu_n (p_n - p_center)`.
    pub fn residual(&self, positions: &[Position3]) -> Vector3<f64> {
        let c = positions[self.center.0];
        self.neighbors
            .iter()
            .zip(&self.mu)
            .map(|(n, m)| (positions[n.0] - c) * *m)
            .sum()
    }

    /// Residual norm divided by `||mu|| * max_n ||p_n - p_center||`.
    pub fn relative_residual(&self, positions: &[Position3]) -> f64 {
        let c = positions[self.center.0];
        let scale = self
            .neighbors
            .iter()
            .map(|n| (positions[n.0] - c).norm())
            .fold(0.0, f64::max);
        let mu_norm = self.mu.iter().map(|m| m * m).sum::<f64>().sqrt();
        let r = self.residual(positions).norm();
        if scale * mu_norm == 0.0 {
            r
        } else {
            r / (scale * mu_norm)
        }
    }

    /// Largest entrywise difference to `other` over the same tuple.
    pub fn mu_distance(&self, other: &DisplacementConstraint) -> f64 {
        assert_eq!(self.neighbors, other.neighbors, "constraints over different tuples");
        self.mu
            .iter()
            .zip(&other.mu)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Build one constraint per tuple in parallel; results keep tuple order.
pub fn build_all(
    tuples: &[ConstraintTuple],
    meas: &MeasurementSet,
    config: &BuilderConfig,
) -> Vec<Result<DisplacementConstraint>> {
    tuples.par_iter().map(|t| build_constraint(t, meas, config)).collect()
}
