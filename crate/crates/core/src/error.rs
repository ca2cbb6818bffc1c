use thiserror::Error;

use crate::geom::{MeasurementKind, NodeId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("no position for node {0}")]
    MissingPosition(NodeId),

    #[error("missing {kind} measurement for {key}")]
    MissingMeasurement { kind: MeasurementKind, key: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("inconsistent angle parameters: {0}")]
    InconsistentParameters(String),

    /// Classical MDS found more than `dim` significant eigenvalues.
    #[error("distance matrix is not embeddable in {dim} dimensions (spectrum {spectrum:?})")]
    NotEmbeddable { dim: usize, spectrum: Vec<f64> },

    #[error("colinear triple ({}, {}, {}): |sin| = {sine:e}", triple[0], triple[1], triple[2])]
    Colinear { triple: [NodeId; 3], sine: f64 },

    #[error("angle ratio chains disagree by {max_discrepancy:e} (relative)")]
    InconsistentAngles { max_discrepancy: f64 },

    #[error("degenerate tuple: null space has dimension {nullity}")]
    DegenerateTuple { nullity: usize },

    #[error("node {node} out of range for a system of {n} nodes")]
    NodeOutOfRange { node: NodeId, n: usize },
}

impl Error {
    /// Stable machine-readable tag for the error variant.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::DegenerateGeometry(_) => "degenerate_geometry",
            Error::Validation(_) => "validation",
            Error::MissingPosition(_) => "missing_position",
            Error::MissingMeasurement { .. } => "missing_measurement",
            Error::Unsupported(_) => "unsupported",
            Error::InconsistentParameters(_) => "inconsistent_parameters",
            Error::NotEmbeddable { .. } => "not_embeddable",
            Error::Colinear { .. } => "colinear",
            Error::InconsistentAngles { .. } => "inconsistent_angles",
            Error::DegenerateTuple { .. } => "degenerate_tuple",
            Error::NodeOutOfRange { .. } => "node_out_of_range",
        }
    }
}
