//! Classical multidimensional scaling for small subnetworks.
//!
//! Given squared pairwise distances `M`, the double-centered matrix
//! `X = -1/2 J M J` with `J = I - (1/m) 1 1^T` is the Gram matrix of a
//! centered configuration. Its top `dim` eigenpairs give coordinates
//! `Lambda^(1/2) V^T` that reproduce `M` up to a rigid motion.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;

/// Squared pairwise distances with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix(DMatrix<f64>);

impl DistanceMatrix {
    pub fn new(squared: DMatrix<f64>) -> Result<Self> {
        validate_squared(&squared)?;
        Ok(DistanceMatrix(squared))
    }

    /// From unsquared distances `d[a][b]`.
    pub fn from_distances(d: &DMatrix<f64>) -> Result<Self> {
        Self::new(d.map(|x| x * x))
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.0.nrows() == 0
    }
}

/// Squared distances normalized by the squared length of a reference edge.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioMatrix {
    entries: DMatrix<f64>,
    reference: (usize, usize),
}

impl RatioMatrix {
    pub fn new(entries: DMatrix<f64>, reference: (usize, usize)) -> Result<Self> {
        validate_squared(&entries)?;
        let (a, b) = reference;
        if a == b || a >= entries.nrows() || b >= entries.nrows() {
            return Err(Error::Validation(format!("invalid reference edge {reference:?}")));
        }
        let r = entries[(a, b)];
        if (r - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!(
                "reference entry ({a}, {b}) of the ratio matrix is {r}, must be 1"
            )));
        }
        Ok(RatioMatrix { entries, reference })
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn reference(&self) -> (usize, usize) {
        self.reference
    }
}

fn validate_squared(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() || m.nrows() < 2 {
        return Err(Error::Validation(format!(
            "distance matrix must be square, got {:?}",
            m.shape()
        )));
    }
    let scale = m.amax().max(f64::MIN_POSITIVE);
    for a in 0..m.nrows() {
        if m[(a, a)] != 0.0 {
            return Err(Error::Validation(format!("diagonal entry {a} is {}", m[(a, a)])));
        }
        for b in 0..m.ncols() {
            let x = m[(a, b)];
            if !(x.is_finite() && x >= 0.0) {
                return Err(Error::Validation(format!("entry ({a}, {b}) is {x}")));
            }
            if (x - m[(b, a)]).abs() > SYMMETRY_TOL * scale {
                return Err(Error::Validation(format!("matrix is not symmetric at ({a}, {b})")));
            }
        }
    }
    Ok(())
}

/// A centered configuration with one column per point.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub coords: DMatrix<f64>,
    /// Eigenvalues of the Gram matrix in decreasing order.
    pub spectrum: Vec<f64>,
}

impl Embedding {
    pub fn point(&self, a: usize) -> nalgebra::DVector<f64> {
        self.coords.column(a).into_owned()
    }

    /// Squared pairwise distances of the embedded points.
    pub fn squared_distances(&self) -> DMatrix<f64> {
        let m = self.coords.ncols();
        DMatrix::from_fn(m, m, |a, b| {
            (self.coords.column(a) - self.coords.column(b)).norm_squared()
        })
    }
}

/// Input accepted by [`mds_embed`].
pub trait SquaredDistances {
    fn squared(&self) -> &DMatrix<f64>;
}

impl SquaredDistances for DistanceMatrix {
    fn squared(&self) -> &DMatrix<f64> {
        &self.0
    }
}

impl SquaredDistances for RatioMatrix {
    fn squared(&self) -> &DMatrix<f64> {
        &self.entries
    }
}

/// Embed in `dim` dimensions.
///
/// With `embed_tol = Some(tol)`, trailing eigenvalues larger in magnitude
/// than `tol * lambda_1` reject the input as not embeddable. `None` keeps the
/// best rank-`dim` approximation regardless, which is what noisy inputs need.
/// Negative eigenvalues from roundoff are clamped to zero.
pub fn mds_embed<M: SquaredDistances + ?Sized>(m: &M, dim: usize, embed_tol: Option<f64>) -> Result<Embedding> {
    let sq = m.squared();
    let n = sq.nrows();
    if dim == 0 || dim >= n {
        return Err(Error::Validation(format!(
            "cannot embed {n} points in {dim} dimensions"
        )));
    }
    let j = DMatrix::<f64>::identity(n, n) - DMatrix::from_element(n, n, 1.0 / n as f64);
    let mut x = &j * sq * &j * -0.5;
    // symmetrize against roundoff in the triple product
    x = (&x + x.transpose()) * 0.5;
    let eig = SymmetricEigen::new(x);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let spectrum: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();

    let top = spectrum[0];
    if let Some(tol) = embed_tol {
        let trailing = spectrum[dim..].iter().fold(0.0f64, |acc, l| acc.max(l.abs()));
        if top.is_nan() || top <= 0.0 || trailing > tol * top {
            return Err(Error::NotEmbeddable { dim, spectrum });
        }
    }
    let mut coords = DMatrix::zeros(dim, n);
    for (row, &k) in order.iter().take(dim).enumerate() {
        let s = eig.eigenvalues[k].max(0.0).sqrt();
        for a in 0..n {
            coords[(row, a)] = s * eig.eigenvectors[(a, k)];
        }
    }
    Ok(Embedding { coords, spectrum })
}
