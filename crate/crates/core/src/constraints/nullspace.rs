use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Entries below this magnitude do not decide the canonical sign.
const SIGN_TOL: f64 = 1e-9;

/// Null vector of a small wide coefficient matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct NullSpace {
    /// Unit-norm, canonical-sign null vector (smallest right singular vector).
    pub mu: Vec<f64>,
    /// Number of singular values at or below `rank_tol * sigma_max`.
    pub nullity: usize,
    /// Singular values in decreasing order, one per column.
    pub singular_values: Vec<f64>,
}

impl NullSpace {
    pub fn is_degenerate(&self) -> bool {
        self.nullity > 1
    }
}

/// Unit null vector of `a`, plus a nullity count against `rank_tol`.
///
/// `a` is padded with zero rows to a square matrix so that the SVD returns
/// every right singular vector. When the null space has dimension > 1 the
/// smallest singular vector is still returned and `nullity` reports the
/// degeneracy.
pub fn null_coefficients(a: &DMatrix<f64>, rank_tol: f64) -> Result<NullSpace> {
    let (rows, cols) = a.shape();
    if cols < 2 {
        return Err(Error::Validation(format!("need at least two columns, got {cols}")));
    }
    if !a.iter().all(|x| x.is_finite()) {
        return Err(Error::Validation("coefficient matrix has non-finite entries".into()));
    }
    let norm = a.norm();
    if norm == 0.0 {
        return Err(Error::Validation("coefficient matrix is identically zero".into()));
    }
    // scale to unit Frobenius norm; the null space is unchanged
    let scaled = a / norm;
    let square = if rows < cols {
        let mut s = DMatrix::zeros(cols, cols);
        s.view_mut((0, 0), (rows, cols)).copy_from(&scaled);
        s
    } else {
        scaled
    };
    let svd = square.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let singular: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let smallest = *order.last().expect("at least two singular values");
    let mu = canonicalize(v_t.row(smallest).transpose());
    let s_max = singular[0];
    let nullity = singular.iter().filter(|&&s| s <= rank_tol * s_max).count();
    Ok(NullSpace {
        mu,
        nullity,
        singular_values: singular.iter().map(|s| s * norm).collect(),
    })
}

/// Unit norm with the first clearly nonzero entry positive.
pub fn canonicalize(v: DVector<f64>) -> Vec<f64> {
    let n = v.norm();
    if n == 0.0 {
        return v.iter().copied().collect();
    }
    let mut v = v / n;
    if let Some(first) = v.iter().find(|x| x.abs() > SIGN_TOL) {
        if *first < 0.0 {
            v.neg_mut();
        }
    }
    v.iter().copied().collect()
}
