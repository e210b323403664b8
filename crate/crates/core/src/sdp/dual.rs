use nalgebra::{DMatrix, DVector};

use super::WeightMatrix;
use crate::error::{Error, Result};
use crate::numerics;
use crate::polytope::{FacetIncidence, GramBorderMatrix, Inscription};

/// Relative feasibility tolerance used by [`duality_gap`].
const FEAS_TOL: f64 = 1e-7;

/// `(u, w, λ)` for the dual problem. `w` is indexed by the zero positions
/// of the incidence in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCertificate {
    pub u: DVector<f64>,
    pub w: DVector<f64>,
    pub weights: WeightMatrix,
}

impl DualCertificate {
    /// `u_i = ū`, `w_k = w̄`, `λ_ij = λ̄`.
    pub fn uniform(incidence: &FacetIncidence, u_bar: f64, w_bar: f64, lambda_bar: f64) -> Result<Self> {
        Ok(Self {
            u: DVector::from_element(incidence.n(), u_bar),
            w: DVector::from_element(incidence.zero_count(), w_bar),
            weights: WeightMatrix::uniform(incidence, lambda_bar)?,
        })
    }
}

/// `M_ij = -λ_ij` off the zero pattern and `w_k` on its `k`-th position.
pub fn dual_matrix(cert: &DualCertificate, incidence: &FacetIncidence) -> Result<DMatrix<f64>> {
    let zeros = incidence.zero_positions();
    if cert.w.len() != zeros.len() {
        return Err(Error::LengthMismatch {
            expected: zeros.len(),
            got: cert.w.len(),
        });
    }
    if cert.weights.matrix().shape() != (incidence.n(), incidence.m()) {
        return Err(Error::DimensionMismatch("weights do not match the incidence".into()));
    }
    let mut m = -cert.weights.matrix().clone();
    for (k, &(i, j)) in zeros.iter().enumerate() {
        m[(i, j)] = cert.w[k];
    }
    Ok(m)
}

/// `λ_min(I + diag(u) - ¼ M Mᵀ)`; the certificate is dual feasible iff this
/// is nonnegative.
pub fn dual_feasibility_margin(cert: &DualCertificate, incidence: &FacetIncidence) -> Result<f64> {
    if cert.u.len() != incidence.n() {
        return Err(Error::LengthMismatch {
            expected: incidence.n(),
            got: cert.u.len(),
        });
    }
    let m = dual_matrix(cert, incidence)?;
    let mut schur = -(&m * m.transpose()) * 0.25;
    for i in 0..incidence.n() {
        schur[(i, i)] += 1.0 + cert.u[i];
    }
    numerics::min_eigenvalue(&schur)
}

pub fn check_dual_feasible(cert: &DualCertificate, incidence: &FacetIncidence, tol: f64) -> bool {
    dual_feasibility_margin(cert, incidence).is_ok_and(|margin| margin >= -tol)
}

/// `f_d = m + n + Σ M_ij - Σ u_i + 1`.
pub fn dual_objective(cert: &DualCertificate, incidence: &FacetIncidence) -> Result<f64> {
    let m = dual_matrix(cert, incidence)?;
    Ok((incidence.m() + incidence.n()) as f64 + m.sum() - cert.u.sum() + 1.0)
}

/// The `(A, B, S)` blocks of a bordered Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalPoint {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub s: DMatrix<f64>,
}

impl PrimalPoint {
    pub fn from_gram(x: &GramBorderMatrix) -> Self {
        Self {
            a: x.a_block(),
            b: x.b_block(),
            s: x.s_block(),
        }
    }

    /// `A = VᵀV + 1`, `B = HᵀH + 1`, `S = 1 - VᵀH`.
    pub fn from_inscription(insc: &Inscription) -> Self {
        Self::from_gram(&GramBorderMatrix::from_inscription(insc))
    }

    /// Largest violation of the constraints of the Schur-form primal:
    /// `[[A, S], [Sᵀ, B]] - 1 ⪰ 0`, `A_ii = 2`, `S = 0` on the zero pattern.
    pub fn infeasibility(&self, incidence: &FacetIncidence) -> Result<f64> {
        let (n, m) = (incidence.n(), incidence.m());
        if self.a.shape() != (n, n) || self.b.shape() != (m, m) || self.s.shape() != (n, m) {
            return Err(Error::DimensionMismatch("primal blocks do not match the incidence".into()));
        }
        let mut block = DMatrix::zeros(n + m, n + m);
        block.view_mut((0, 0), (n, n)).copy_from(&self.a);
        block.view_mut((n, n), (m, m)).copy_from(&self.b);
        block.view_mut((0, n), (n, m)).copy_from(&self.s);
        block.view_mut((n, 0), (m, n)).copy_from(&self.s.transpose());
        block.add_scalar_mut(-1.0);
        let psd = (-numerics::min_eigenvalue(&block)?).max(0.0);
        let diag = (0..n).map(|i| (self.a[(i, i)] - 2.0).abs()).fold(0.0, f64::max);
        let zeros = incidence
            .zero_positions()
            .into_iter()
            .map(|(i, j)| self.s[(i, j)].abs())
            .fold(0.0, f64::max);
        Ok(psd.max(diag).max(zeros))
    }
}

/// `f_p = ⟨A, I⟩ + ⟨B, I⟩ - Σ λ_ij S_ij + 1`.
pub fn primal_objective(point: &PrimalPoint, weights: &WeightMatrix) -> f64 {
    point.a.trace() + point.b.trace() - weights.matrix().component_mul(&point.s).sum() + 1.0
}

/// `f_p - f_d` after checking both points for feasibility.
pub fn duality_gap(point: &PrimalPoint, cert: &DualCertificate, incidence: &FacetIncidence) -> Result<f64> {
    let scale = 1.0 + point.a.amax().max(point.b.amax()).max(point.s.amax());
    let primal_violation = point.infeasibility(incidence)?;
    if primal_violation > FEAS_TOL * scale {
        return Err(Error::InfeasiblePoint {
            side: "primal",
            detail: format!("constraint violation {primal_violation:e}"),
        });
    }
    let margin = dual_feasibility_margin(cert, incidence)?;
    let dual_scale = 1.0 + cert.u.amax() + cert.weights.max() + cert.w.amax();
    if margin < -FEAS_TOL * dual_scale {
        return Err(Error::InfeasiblePoint {
            side: "dual",
            detail: format!("Schur complement eigenvalue {margin:e}"),
        });
    }
    Ok(primal_objective(point, &cert.weights) - dual_objective(cert, incidence)?)
}

/// The two scalar conditions for a uniform certificate on a facet-transitive
/// polytope: `λ_max(MMᵀ) ≤ 4 + 4ū` and `n(1 + ū) + m‖h‖² = (λ̄ + w̄) k m`.
pub fn check_simplified_conditions(
    incidence: &FacetIncidence,
    h_norm_sq: f64,
    u_bar: f64,
    w_bar: f64,
    lambda_bar: f64,
    tol: f64,
) -> Result<(bool, bool)> {
    let cert = DualCertificate::uniform(incidence, u_bar, w_bar, lambda_bar)?;
    let m = dual_matrix(&cert, incidence)?;
    let lmax = numerics::max_eigenvalue(&(&m * m.transpose()))?;
    let bound = 4.0 + 4.0 * u_bar;
    let feasible = lmax <= bound + tol * (1.0 + bound.abs());
    let zero_gap = match incidence.uniform_facet_size() {
        Some(k) => {
            let (n, mf) = (incidence.n() as f64, incidence.m() as f64);
            let lhs = n * (1.0 + u_bar) + mf * h_norm_sq;
            let rhs = (lambda_bar + w_bar) * k as f64 * mf;
            (lhs - rhs).abs() <= tol * (1.0 + rhs.abs())
        }
        None => false,
    };
    Ok((feasible, zero_gap))
}
