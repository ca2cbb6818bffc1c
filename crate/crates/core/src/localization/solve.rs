use std::collections::BTreeMap;

use nalgebra::{DMatrix, Vector3};
use rayon::prelude::*;

use super::StackedConstraintSystem;
use crate::error::{Error, Result};
use crate::geom::{NodeId, Position3};

/// Relative singular-value threshold for a unique anchored solution.
pub const LOCALIZABILITY_TOL: f64 = 1e-8;

/// Spectrum summary of the free-node block of the constraint matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankDiagnostics {
    pub rank_tol: f64,
    pub free_columns: usize,
    pub rank: usize,
    pub sigma_max: f64,
    pub sigma_min: f64,
}

impl RankDiagnostics {
    /// `sigma_min / sigma_max`, zero for an empty block.
    pub fn gap(&self) -> f64 {
        if self.sigma_max > 0.0 {
            self.sigma_min / self.sigma_max
        } else {
            0.0
        }
    }

    pub fn full_rank(&self) -> bool {
        self.rank == self.free_columns
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// Indexed by node id; anchors keep their given positions.
    pub positions: Vec<Position3>,
    /// `||B p||` at the returned positions.
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub diverged: bool,
    pub rank_diagnostics: RankDiagnostics,
    /// `||B p||` after every accepted iteration (iterative solver only).
    pub trace: Vec<f64>,
}

struct Partition {
    free: Vec<NodeId>,
}

fn partition(n: usize, anchors: &BTreeMap<NodeId, Position3>) -> Result<Partition> {
    if anchors.is_empty() {
        return Err(Error::Validation("at least one anchor is required".into()));
    }
    if let Some((&node, _)) = anchors.iter().find(|(id, _)| id.0 >= n) {
        return Err(Error::NodeOutOfRange { node, n });
    }
    let free: Vec<NodeId> = (0..n).map(NodeId).filter(|v| !anchors.contains_key(v)).collect();
    Ok(Partition { free })
}

fn rank_of(singular: &[f64], free_columns: usize, rank_tol: f64) -> RankDiagnostics {
    let sigma_max = singular.iter().copied().fold(0.0, f64::max);
    let rank = singular
        .iter()
        .filter(|&&s| s > rank_tol * sigma_max && s > 0.0)
        .count();
    // a wide block has implicit zero singular values
    let sigma_min = if singular.len() < free_columns {
        0.0
    } else {
        singular.iter().copied().fold(f64::INFINITY, f64::min)
    };
    RankDiagnostics {
        rank_tol,
        free_columns,
        rank,
        sigma_max,
        sigma_min: if free_columns == 0 { 0.0 } else { sigma_min },
    }
}

fn free_block(system: &StackedConstraintSystem, part: &Partition) -> DMatrix<f64> {
    let a = system.node_matrix();
    DMatrix::from_fn(a.nrows(), part.free.len(), |r, c| a[(r, part.free[c].0)])
}

/// Rank of the free block; shared by both solvers.
pub fn localizability(
    system: &StackedConstraintSystem,
    anchors: &BTreeMap<NodeId, Position3>,
) -> Result<RankDiagnostics> {
    let part = partition(system.n, anchors)?;
    let af = free_block(system, &part);
    if af.nrows() == 0 || af.ncols() == 0 {
        return Ok(rank_of(&[], part.free.len(), LOCALIZABILITY_TOL));
    }
    let s = af.singular_values();
    Ok(rank_of(s.as_slice(), part.free.len(), LOCALIZABILITY_TOL))
}

/// Least-squares solve of `B_f p_f = -B_a p_a`.
///
/// `B = A (x) I_3`, so the three coordinates decouple and share the scalar
/// block `A_f`. The pseudo-inverse is truncated at `LOCALIZABILITY_TOL`,
/// which yields the minimum-norm solution when `A_f` is rank deficient.
pub fn solve_global(system: &StackedConstraintSystem, anchors: &BTreeMap<NodeId, Position3>) -> Result<SolveReport> {
    let part = partition(system.n, anchors)?;
    let a = system.node_matrix();
    let m = a.nrows();
    let nf = part.free.len();

    let mut positions = vec![Position3::origin(); system.n];
    for (id, p) in anchors {
        positions[id.0] = *p;
    }

    let mut rank = rank_of(&[], nf, LOCALIZABILITY_TOL);
    if m > 0 && nf > 0 {
        let af = free_block(system, &part);
        let mut rhs = DMatrix::zeros(m, 3);
        for (id, p) in anchors {
            for r in 0..m {
                let c = a[(r, id.0)];
                if c != 0.0 {
                    for axis in 0..3 {
                        rhs[(r, axis)] -= c * p[axis];
                    }
                }
            }
        }
        let svd = af.svd(true, true);
        rank = rank_of(svd.singular_values.as_slice(), nf, LOCALIZABILITY_TOL);
        let u = svd.u.as_ref().expect("requested U");
        let v_t = svd.v_t.as_ref().expect("requested V^T");
        let cut = LOCALIZABILITY_TOL * rank.sigma_max;
        let mut coef = u.transpose() * &rhs;
        for (r, &s) in svd.singular_values.iter().enumerate() {
            let inv = if s > cut && s > 0.0 { 1.0 / s } else { 0.0 };
            coef.row_mut(r).scale_mut(inv);
        }
        let sol = v_t.transpose() * coef;
        for (c, v) in part.free.iter().enumerate() {
            positions[v.0] = Position3::new(sol[(c, 0)], sol[(c, 1)], sol[(c, 2)]);
        }
    }

    let x: Vec<Vector3<f64>> = positions.iter().map(|p| p.coords).collect();
    let converged = if nf == 0 { true } else { m > 0 && rank.full_rank() };
    Ok(SolveReport {
        residual_norm: system.residual_norm(&x),
        positions,
        iterations: 1,
        converged,
        diverged: false,
        rank_diagnostics: rank,
        trace: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributedParams {
    pub max_iters: usize,
    /// Initial damping of the per-node Jacobi update; halved on any increase.
    pub step: f64,
    /// Stop once no node moves farther than this in one round.
    pub tol: f64,
}

impl Default for DistributedParams {
    fn default() -> Self {
        DistributedParams {
            max_iters: 200_000,
            step: 1.0,
            tol: 1e-12,
        }
    }
}

/// Halvings allowed before the run is declared divergent.
const MAX_HALVINGS: u32 = 40;

/// Synchronous damped-Jacobi iteration on `1/2 ||B p||^2`.
///
/// In every round each free node reads the residuals of the constraints it
/// appears in (computed from the previous round's positions) and moves by
/// `step * grad_v / D_v`, where `D_v` is the sum of its squared coefficients.
/// Anchors never move. A round that would raise `||B p||` is rejected and
/// the step halved. `converged` additionally requires the free block to have
/// full column rank, since otherwise the fixed point is not unique.
pub fn solve_distributed(
    system: &StackedConstraintSystem,
    anchors: &BTreeMap<NodeId, Position3>,
    params: &DistributedParams,
) -> Result<SolveReport> {
    if !(params.step.is_finite() && params.step > 0.0) {
        return Err(Error::Validation(format!("step must be positive, got {}", params.step)));
    }
    if !(params.tol.is_finite() && params.tol > 0.0) {
        return Err(Error::Validation(format!("tol must be positive, got {}", params.tol)));
    }
    if params.max_iters == 0 {
        return Err(Error::Validation("max_iters must be positive".into()));
    }
    let part = partition(system.n, anchors)?;
    let rank = localizability(system, anchors)?;

    // incidence lists: (row, coefficient) per node
    let mut incident: Vec<Vec<(usize, f64)>> = vec![Vec::new(); system.n];
    for (r, row) in system.rows.iter().enumerate() {
        for &(v, c) in &row.coeffs {
            incident[v.0].push((r, c));
        }
    }
    let diag: Vec<f64> = incident.iter().map(|l| l.iter().map(|(_, c)| c * c).sum()).collect();

    let centroid = anchors.values().map(|p| p.coords).sum::<Vector3<f64>>() / anchors.len() as f64;
    let mut x: Vec<Vector3<f64>> = (0..system.n)
        .map(|v| anchors.get(&NodeId(v)).map_or(centroid, |p| p.coords))
        .collect();

    let residuals =
        |x: &[Vector3<f64>]| -> Vec<Vector3<f64>> { system.rows.par_iter().map(|row| row.apply(x)).collect() };
    let objective = |r: &[Vector3<f64>]| r.iter().map(|v| v.norm_squared()).sum::<f64>();

    let mut r = residuals(&x);
    let mut f = objective(&r);
    let mut step = params.step;
    let mut halvings = 0;
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut settled = false;
    let mut diverged = false;

    while iterations < params.max_iters {
        let moves: Vec<Vector3<f64>> = part
            .free
            .par_iter()
            .map(|v| {
                if diag[v.0] == 0.0 {
                    return Vector3::zeros();
                }
                let g: Vector3<f64> = incident[v.0].iter().map(|&(row, c)| r[row] * c).sum();
                -g / diag[v.0]
            })
            .collect();
        let mut proposal = x.clone();
        let mut displacement = 0.0f64;
        for (v, d) in part.free.iter().zip(&moves) {
            proposal[v.0] += d * step;
            displacement = displacement.max(d.norm() * step);
        }
        let r_new = residuals(&proposal);
        let f_new = objective(&r_new);
        if f_new > f {
            if displacement < params.tol {
                settled = true;
                break;
            }
            halvings += 1;
            if halvings > MAX_HALVINGS {
                diverged = true;
                break;
            }
            step *= 0.5;
            continue;
        }
        x = proposal;
        r = r_new;
        f = f_new;
        iterations += 1;
        trace.push(f.sqrt());
        if displacement < params.tol {
            settled = true;
            break;
        }
    }

    Ok(SolveReport {
        positions: x.iter().map(|v| Position3::from(*v)).collect(),
        residual_norm: f.sqrt(),
        iterations,
        converged: settled && !system.is_empty() && rank.full_rank(),
        diverged,
        rank_diagnostics: rank,
        trace,
    })
}

/// Root-mean-square of per-node position errors over `over`.
pub fn rmse(est: &[Position3], truth: &[Position3], over: &[NodeId]) -> Result<f64> {
    if over.is_empty() {
        return Err(Error::Validation("rmse over an empty node set".into()));
    }
    let mut acc = 0.0;
    for v in over {
        let (a, b) = match (est.get(v.0), truth.get(v.0)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::MissingPosition(*v)),
        };
        acc += (a - b).norm_squared();
    }
    Ok((acc / over.len() as f64).sqrt())
}
