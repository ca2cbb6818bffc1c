use nalgebra::{DMatrix, Vector3};

use crate::constraints::DisplacementConstraint;
use crate::error::{Error, Result};
use crate::geom::NodeId;

/// One constraint as a sparse scalar row over nodes.
///
/// The full row block over the `3n` stacked coordinates is `coeff * I_3` at
/// each listed node; the center carries `-sum(mu)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintRow {
    pub constraint: DisplacementConstraint,
    pub coeffs: Vec<(NodeId, f64)>,
}

impl ConstraintRow {
    fn from_constraint(c: DisplacementConstraint) -> Self {
        let center = -c.mu.iter().sum::<f64>();
        let coeffs = std::iter::once((c.center, center))
            .chain(c.neighbors.iter().copied().zip(c.mu.iter().copied()))
            .collect();
        ConstraintRow { constraint: c, coeffs }
    }

    /// `sum_v coeff_v x_v` for a 3-vector per node.
    pub fn apply(&self, x: &[Vector3<f64>]) -> Vector3<f64> {
        self.coeffs.iter().map(|&(n, a)| x[n.0] * a).sum()
    }

    /// `||apply(x)||` relative to `sum |coeff| * max ||x_v - x_center||`,
    /// falling back to `max ||x_v||` when all differences vanish.
    pub fn relative_residual(&self, x: &[Vector3<f64>]) -> f64 {
        let r = self.apply(x).norm();
        let weight: f64 = self.coeffs.iter().map(|(_, a)| a.abs()).sum();
        let c = x[self.constraint.center.0];
        let spread = self.coeffs.iter().map(|(n, _)| (x[n.0] - c).norm()).fold(0.0, f64::max);
        let scale = if spread > 0.0 {
            spread
        } else {
            self.coeffs.iter().map(|(n, _)| x[n.0].norm()).fold(0.0, f64::max)
        };
        if weight * scale == 0.0 {
            r
        } else {
            r / (weight * scale)
        }
    }
}

/// Displacement constraints stacked into `B` with `B p = 0` on the truth.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedConstraintSystem {
    pub n: usize,
    pub rows: Vec<ConstraintRow>,
    /// Constraints dropped because their null space was degenerate.
    pub skipped_degenerate: usize,
}

/// Stack constraints over `n` nodes; degenerate constraints are skipped.
pub fn assemble(
    constraints: impl IntoIterator<Item = DisplacementConstraint>,
    n: usize,
) -> Result<StackedConstraintSystem> {
    let mut rows = Vec::new();
    let mut skipped = 0;
    for c in constraints {
        for node in std::iter::once(&c.center).chain(&c.neighbors) {
            if node.0 >= n {
                return Err(Error::NodeOutOfRange { node: *node, n });
            }
        }
        if c.degenerate {
            skipped += 1;
            continue;
        }
        rows.push(ConstraintRow::from_constraint(c));
    }
    Ok(StackedConstraintSystem {
        n,
        rows,
        skipped_degenerate: skipped,
    })
}

impl StackedConstraintSystem {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Number of scalar rows of `B` (three per constraint).
    pub fn scalar_rows(&self) -> usize {
        3 * self.rows.len()
    }

    pub fn columns(&self) -> usize {
        3 * self.n
    }

    /// Scalar coefficient matrix `A` with `B = A (x) I_3`.
    pub fn node_matrix(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.rows.len(), self.n);
        for (r, row) in self.rows.iter().enumerate() {
            for &(node, c) in &row.coeffs {
                a[(r, node.0)] += c;
            }
        }
        a
    }

    /// The expanded `3m x 3n` matrix `B`, coordinates ordered node-major.
    pub fn dense_matrix(&self) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(self.scalar_rows(), self.columns());
        for (r, row) in self.rows.iter().enumerate() {
            for &(node, c) in &row.coeffs {
                for axis in 0..3 {
                    b[(3 * r + axis, 3 * node.0 + axis)] += c;
                }
            }
        }
        b
    }

    /// `B x` with `x` given as one 3-vector per node.
    pub fn apply(&self, x: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
        self.rows.iter().map(|row| row.apply(x)).collect()
    }

    pub fn residual_norm(&self, x: &[Vector3<f64>]) -> f64 {
        self.apply(x).iter().map(|r| r.norm_squared()).sum::<f64>().sqrt()
    }

    /// Largest per-constraint relative residual of `B x`.
    pub fn max_relative_residual(&self, x: &[Vector3<f64>]) -> f64 {
        self.rows.iter().map(|row| row.relative_residual(x)).fold(0.0, f64::max)
    }
}
