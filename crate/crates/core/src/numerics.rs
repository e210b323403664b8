//! Dense symmetric linear algebra shared by the solver and the projection
//! algorithms: eigendecomposition, PSD projection, rank truncation and
//! numerical rank.
//!
//! Every routine symmetrizes its input as `(X + Xᵀ)/2` before decomposing.
//! Inputs whose asymmetry exceeds [`SYMMETRY_TOL`] (relative to the largest
//! entry) are rejected.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Largest tolerated `max|X - Xᵀ| / (1 + max|X|)`.
pub const SYMMETRY_TOL: f64 = 1e-8;

/// Eigendecomposition of a symmetric matrix, eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct SymEig {
    pub values: DVector<f64>,
    /// Orthonormal eigenvectors stored column-wise, in the order of `values`.
    pub vectors: DMatrix<f64>,
}

impl SymEig {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let scaled = scale_columns(&self.vectors, self.values.iter().copied());
        &scaled * self.vectors.transpose()
    }
}

pub(crate) fn check_finite(x: &DMatrix<f64>) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Validates squareness/finiteness/symmetry and returns `(X + Xᵀ)/2`.
pub fn symmetrize(x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !x.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            x.nrows(),
            x.ncols()
        )));
    }
    check_finite(x)?;
    let scale = 1.0 + x.amax();
    let mut asym = 0.0_f64;
    let n = x.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            asym = asym.max((x[(i, j)] - x[(j, i)]).abs());
        }
    }
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric(asym));
    }
    Ok((x + x.transpose()) * 0.5)
}

/// Full spectrum of a symmetric matrix, eigenvalues descending.
pub fn sym_eig(x: &DMatrix<f64>) -> Result<SymEig> {
    let sym = symmetrize(x)?;
    Ok(eig_of_symmetric(sym))
}

/// Assumes `sym` is already exactly symmetric and finite.
pub(crate) fn eig_of_symmetric(sym: DMatrix<f64>) -> SymEig {
    let n = sym.nrows();
    if n == 0 {
        return SymEig {
            values: DVector::zeros(0),
            vectors: DMatrix::zeros(0, 0),
        };
    }
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    SymEig { values, vectors }
}

fn scale_columns(q: &DMatrix<f64>, weights: impl Iterator<Item = f64>) -> DMatrix<f64> {
    let mut out = q.clone();
    for (mut col, w) in out.column_iter_mut().zip(weights) {
        col *= w;
    }
    out
}

/// Reconstructs `Σ w_k q_k q_kᵀ` over the selected eigenpairs.
fn partial_reconstruct(eig: &SymEig, keep: &[usize]) -> DMatrix<f64> {
    let n = eig.vectors.nrows();
    if keep.is_empty() {
        return DMatrix::zeros(n, n);
    }
    let q = eig.vectors.select_columns(keep);
    let scaled = scale_columns(&q, keep.iter().map(|&k| eig.values[k]));
    let out = &scaled * q.transpose();
    (&out + out.transpose()) * 0.5
}

/// Frobenius-nearest positive semidefinite matrix.
pub fn psd_project(x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sym = symmetrize(x)?;
    Ok(psd_project_symmetric(sym))
}

/// PSD projection of an already symmetric, finite matrix.
pub(crate) fn psd_project_symmetric(sym: DMatrix<f64>) -> DMatrix<f64> {
    let eig = eig_of_symmetric(sym);
    let n = eig.values.len();
    let positive: Vec<usize> = (0..n).filter(|&k| eig.values[k] > 0.0).collect();
    // Reconstruct from whichever side needs fewer eigenvectors.
    if positive.len() <= n / 2 {
        partial_reconstruct(&eig, &positive)
    } else {
        let negative: Vec<usize> = (0..n).filter(|&k| eig.values[k] <= 0.0).collect();
        let full = eig.reconstruct();
        let neg = partial_reconstruct(&eig, &negative);
        let out = full - neg;
        (&out + out.transpose()) * 0.5
    }
}

/// Best rank-`r` approximation in Frobenius norm: keeps the `r` eigenpairs of
/// largest absolute value, which for symmetric input is the truncated SVD.
pub fn rank_truncate(x: &DMatrix<f64>, r: usize) -> Result<DMatrix<f64>> {
    let n = x.nrows();
    if r == 0 || r > n {
        return Err(Error::InvalidParam(format!(
            "truncation rank {r} outside 1..={n}"
        )));
    }
    let sym = symmetrize(x)?;
    Ok(rank_truncate_symmetric(sym, r))
}

pub(crate) fn rank_truncate_symmetric(sym: DMatrix<f64>, r: usize) -> DMatrix<f64> {
    let eig = eig_of_symmetric(sym);
    let n = eig.values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.values[b]
            .abs()
            .total_cmp(&eig.values[a].abs())
            .then(a.cmp(&b))
    });
    order.truncate(r);
    partial_reconstruct(&eig, &order)
}

/// Singular values in descending order, read off the spectrum of the
/// symmetric embedding `[[0, X], [Xᵀ, 0]]` (eigenvalues `±σ_i`). The dense
/// SVD in nalgebra 0.35 loses accuracy on some small well-conditioned inputs.
pub fn singular_values(x: &DMatrix<f64>) -> Result<DVector<f64>> {
    check_finite(x)?;
    let (r, c) = x.shape();
    let k = r.min(c);
    if k == 0 {
        return Ok(DVector::zeros(0));
    }
    if r == c && (x - x.transpose()).amax() == 0.0 {
        let mut sv: Vec<f64> = x.clone().symmetric_eigenvalues().iter().map(|v| v.abs()).collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        return Ok(DVector::from_vec(sv));
    }
    let mut embed = DMatrix::zeros(r + c, r + c);
    embed.view_mut((0, r), (r, c)).copy_from(x);
    embed.view_mut((r, 0), (c, r)).copy_from(&x.transpose());
    let mut eig: Vec<f64> = embed.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    Ok(DVector::from_iterator(k, eig.into_iter().take(k).map(|v| v.max(0.0))))
}

/// Number of singular values strictly above `tol · σ_max`.
pub fn numeric_rank(x: &DMatrix<f64>, tol: f64) -> Result<usize> {
    if tol <= 0.0 {
        return Err(Error::InvalidParam(format!("rank tolerance {tol} must be > 0")));
    }
    check_finite(x)?;
    if x.nrows() == 0 || x.ncols() == 0 {
        return Ok(0);
    }
    let sv = singular_values(x)?;
    let smax = sv.max();
    if smax == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > tol * smax).count())
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(x: &DMatrix<f64>) -> Result<f64> {
    let eig = sym_eig(x)?;
    Ok(eig.values.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Largest eigenvalue of a symmetric matrix.
pub fn max_eigenvalue(x: &DMatrix<f64>) -> Result<f64> {
    let eig = sym_eig(x)?;
    Ok(eig.values.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}
