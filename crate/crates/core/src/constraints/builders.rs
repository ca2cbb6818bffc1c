use std::collections::BTreeMap;

use nalgebra::{DMatrix, Vector3};

use super::mds::{mds_embed, DistanceMatrix, RatioMatrix, SquaredDistances};
use super::nullspace::{canonicalize, null_coefficients};
use super::{BuilderConfig, ConstraintTuple, DisplacementConstraint};
use crate::error::{Error, Result};
use crate::geom::{sin_angle_between, Edge, MeasurementKind, MeasurementSet, NodeId};

/// Dispatch on the measurement family.
pub fn build_constraint(
    tuple: &ConstraintTuple,
    meas: &MeasurementSet,
    config: &BuilderConfig,
) -> Result<DisplacementConstraint> {
    match meas.kind() {
        MeasurementKind::RelativePosition => displacement_from_relative_position(tuple, meas, config),
        MeasurementKind::Distance => displacement_from_distance(tuple, meas, config),
        MeasurementKind::RatioOfDistance => displacement_from_ratio(tuple, meas, config),
        MeasurementKind::LocalBearing => displacement_from_bearing(tuple, meas, config),
        MeasurementKind::Angle => displacement_from_angles(tuple, meas, config),
    }
}

fn emit(
    tuple: &ConstraintTuple,
    mu: Vec<f64>,
    nullity: usize,
    config: &BuilderConfig,
) -> Result<DisplacementConstraint> {
    if nullity > 1 && config.strict {
        return Err(Error::DegenerateTuple { nullity });
    }
    DisplacementConstraint::new(tuple.center, tuple.neighbors.clone(), mu, nullity > 1)
}

fn columns(vectors: &[Vector3<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(3, vectors.len(), |r, c| vectors[c][r])
}

/// Null space of the local relative positions; the observer's frame rotation
/// is orthogonal and drops out.
pub fn displacement_from_relative_position(
    tuple: &ConstraintTuple,
    meas: &MeasurementSet,
    config: &BuilderConfig,
) -> Result<DisplacementConstraint> {
    let cols = tuple
        .neighbors
        .iter()
        .map(|&n| meas.relative_position(tuple.center, n))
        .collect::<Result<Vec<_>>>()?;
    let ns = null_coefficients(&columns(&cols), config.rank_tol)?;
    emit(tuple, ns.mu, ns.nullity, config)
}

/// MDS embedding of the tuple followed by the null space of `q_n - q_center`.
fn from_squared<M: SquaredDistances>(
    tuple: &ConstraintTuple,
    m: &M,
    config: &BuilderConfig,
) -> Result<DisplacementConstraint> {
    let dim = tuple.dim();
    let emb = mds_embed(m, dim, config.embed_tol)?;
    let q0 = emb.coords.column(0);
    let a = DMatrix::from_fn(dim, tuple.neighbors.len(), |r, c| emb.coords[(r, c + 1)] - q0[r]);
    let ns = null_coefficients(&a, config.rank_tol)?;
    emit(tuple, ns.mu, ns.nullity, config)
}

fn pairwise_matrix(nodes: &[NodeId], mut value: impl FnMut(NodeId, NodeId) -> Result<f64>) -> Result<DMatrix<f64>> {
    let n = nodes.len();
    let mut m = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in a + 1..n {
            let v = value(nodes[a], nodes[b])?;
            m[(a, b)] = v;
            m[(b, a)] = v;
        }
    }
    Ok(m)
}

pub fn displacement_from_distance(
    tuple: &ConstraintTuple,
    meas: &MeasurementSet,
    config: &BuilderConfig,
) -> Result<DisplacementConstraint> {
    let nodes = tuple.nodes();
    let sq = pairwise_matrix(&nodes, |a, b| meas.distance(a, b).map(|d| d * d))?;
    from_squared(tuple, &DistanceMatrix::new(sq)?, config)
}

/// Ratios are re-referenced to the tuple's own edge `(center, first neighbor)`.
pub fn displacement_from_ratio(
    tuple: &ConstraintTuple,
    meas: &MeasurementSet,
    config: &BuilderConfig,
) -> Result<DisplacementConstraint> {
    let MeasurementSet::RatioOfDistance { reference, ratios } = meas else {
        return Err(Error::Unsupported(format!(
            "ratio builder given {} measurements",
            meas.kind()
        )));
    };
    if let Some(&r) = ratios.get(reference) {
        if (r - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!(
                "reference edge {reference} has ratio {r}, must be 1"
            )));
        }
    }
    let nodes = tuple.nodes();
    let base = meas.ratio(nodes[0], nodes[1])?;
    let sq = pairwise_matrix(&nodes, |a, b| meas.ratio(a, b).map(|r| (r / base).powi(2)))?;
    from_squared(tuple, &RatioMatrix::new(sq, (0, 1))?, config)
}

/// Bearing null vector rescaled into a displacement constraint.
///
/// `mu_bar` solves `sum_n mu_bar_n g_{center,n} = 0`. Since
/// `e_{center,n} = d_{center,n} g_{center,n}`, the displacement coefficients
/// are `mu_n = mu_bar_n d_{center,pivot} / d_{center,n}`, where the pivot is
/// the first neighbor. In the triangle `(center, pivot, n)` the sine rule
/// gives that ratio as `sin(angle at n) / sin(angle at pivot)`, and both
/// angles come from bearings measured by `n` and by the pivot.
pub fn displacement_from_bearing(
    tuple: &ConstraintTuple,
    meas: &MeasurementSet,
    config: &BuilderConfig,
) -> Result<DisplacementConstraint> {
    let i = tuple.center;
    let cols = tuple
        .neighbors
        .iter()
        .map(|&n| meas.bearing(i, n))
        .collect::<Result<Vec<_>>>()?;
    let ns = null_coefficients(&columns(&cols), config.rank_tol)?;

    let pivot = tuple.neighbors[0];
    let mut mu = ns.mu.clone();
    for (slot, &n) in tuple.neighbors.iter().enumerate().skip(1) {
        let sin_at_n = sin_angle_between(&meas.bearing(n, i)?, &meas.bearing(n, pivot)?);
        let sin_at_pivot = sin_angle_between(&meas.bearing(pivot, i)?, &meas.bearing(pivot, n)?);
        let sine = sin_at_n.min(sin_at_pivot);
        if sine < config.colinear_sine {
            return Err(Error::Colinear {
                triple: [i, pivot, n],
                sine,
            });
        }
        mu[slot] *= sin_at_n / sin_at_pivot;
    }
    let mu = canonicalize(nalgebra::DVector::from_vec(mu));
    emit(tuple, mu, ns.nullity, config)
}

/// Ratio matrix of a tuple computed from interior angles alone.
///
/// Starting from the reference edge `(center, first neighbor)` with ratio 1,
/// each unknown edge is reached through triangles that share an already
/// known edge, using `d_e / sin(opposite angle) = const`. Edges reachable by
/// several triangles at the same stage get the mean of their estimates.
/// Returns the squared-ratio matrix and the largest relative spread between
/// estimates of one edge.
pub fn ratio_matrix_from_angles(
    tuple: &ConstraintTuple,
    meas: &MeasurementSet,
    config: &BuilderConfig,
) -> Result<(RatioMatrix, f64)> {
    if meas.kind() != MeasurementKind::Angle {
        return Err(Error::Unsupported(format!(
            "angle builder given {} measurements",
            meas.kind()
        )));
    }
    let nodes = tuple.nodes();
    let n = nodes.len();

    // local triangles with all three angles measured, as sines per vertex
    struct Tri {
        v: [usize; 3],
        sin: [f64; 3],
    }
    let mut triangles = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                let v = [a, b, c];
                let angles: Result<Vec<f64>> = (0..3)
                    .map(|x| meas.angle(nodes[v[x]], nodes[v[(x + 1) % 3]], nodes[v[(x + 2) % 3]]))
                    .collect();
                if let Ok(t) = angles {
                    triangles.push(Tri {
                        v,
                        sin: [t[0].sin(), t[1].sin(), t[2].sin()],
                    });
                }
            }
        }
    }

    let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
    let mut known: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    known.insert((0, 1), 1.0);
    let total = n * (n - 1) / 2;
    let mut max_spread = 0.0f64;

    while known.len() < total {
        let mut estimates: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
        for tri in &triangles {
            // edge opposite vertex x joins the other two
            for x in 0..3 {
                let e = key(tri.v[(x + 1) % 3], tri.v[(x + 2) % 3]);
                if known.contains_key(&e) {
                    continue;
                }
                for y in (0..3).filter(|&y| y != x) {
                    let e2 = key(tri.v[(y + 1) % 3], tri.v[(y + 2) % 3]);
                    let Some(&r2) = known.get(&e2) else { continue };
                    let sine = tri.sin.iter().copied().fold(f64::INFINITY, f64::min);
                    if sine < config.colinear_sine {
                        return Err(Error::Colinear {
                            triple: tri.v.map(|k| nodes[k]),
                            sine,
                        });
                    }
                    estimates.entry(e).or_default().push(r2 * tri.sin[x] / tri.sin[y]);
                }
            }
        }
        if estimates.is_empty() {
            break;
        }
        for (e, est) in estimates {
            let mean = est.iter().sum::<f64>() / est.len() as f64;
            let (lo, hi) = est.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            });
            max_spread = max_spread.max((hi - lo) / mean);
            known.insert(e, mean);
        }
    }

    if known.len() < total {
        let (a, b) = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .find(|e| !known.contains_key(e))
            .expect("some edge is unknown");
        let edge = Edge::new(nodes[a], nodes[b])?;
        return Err(Error::MissingMeasurement {
            kind: MeasurementKind::Angle,
            key: format!("triangle angles chaining edge {edge} to the reference"),
        });
    }
    if max_spread > config.angle_consistency_tol {
        return Err(Error::InconsistentAngles {
            max_discrepancy: max_spread,
        });
    }
    let sq = DMatrix::from_fn(n, n, |a, b| if a == b { 0.0 } else { known[&key(a, b)].powi(2) });
    Ok((RatioMatrix::new(sq, (0, 1))?, max_spread))
}

/// Ratio matrix from angles via the sine rule, then the MDS pipeline.
pub fn displacement_from_angles(
    tuple: &ConstraintTuple,
    meas: &MeasurementSet,
    config: &BuilderConfig,
) -> Result<DisplacementConstraint> {
    let (ratios, _) = ratio_matrix_from_angles(tuple, meas, config)?;
    from_squared(tuple, &ratios, config)
}
