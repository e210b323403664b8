//! The penalized-trace relaxation
//!
//! ```text
//! min  tr(X) - Σ_{(i,j) ∉ I^z} λ_ij S_ij
//! s.t. X = [[1, 1ᵀ, 1ᵀ], [1, A, S], [1, Sᵀ, B]] ⪰ 0,
//!      S_ij = 0 on I^z,  A_ii = 2,
//! ```
//!
//! its dual, certificate checks, and weight tuning against a known
//! inscription.

mod dual;
mod splitting;
mod tuning;

pub use dual::{
    check_dual_feasible, check_simplified_conditions, dual_feasibility_margin, dual_matrix,
    dual_objective, duality_gap, primal_objective, DualCertificate, PrimalPoint,
};
pub use splitting::{SolverOptions, SplittingState};
pub use tuning::{tune_lambda_star, LambdaStar};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::polytope::{FacetIncidence, GramBorderMatrix};
pub(crate) use splitting::EntryConstraints;

/// Penalty weights `λ_ij ≥ 0`, zero on the zero pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    lambda: DMatrix<f64>,
}

impl WeightMatrix {
    pub fn new(incidence: &FacetIncidence, lambda: DMatrix<f64>) -> Result<Self> {
        if lambda.shape() != (incidence.n(), incidence.m()) {
            return Err(Error::DimensionMismatch(format!(
                "weights are {}x{}, incidence is {}x{}",
                lambda.nrows(),
                lambda.ncols(),
                incidence.n(),
                incidence.m()
            )));
        }
        for i in 0..incidence.n() {
            for j in 0..incidence.m() {
                let l = lambda[(i, j)];
                if !l.is_finite() || l < 0.0 {
                    return Err(Error::InvalidParam(format!("weight ({i}, {j}) = {l}")));
                }
                if incidence.is_on(i, j) && l != 0.0 {
                    return Err(Error::InvalidParam(format!(
                        "weight ({i}, {j}) sits on the zero pattern but is {l}"
                    )));
                }
            }
        }
        Ok(Self { lambda })
    }

    /// `λ_ij = value` off the zero pattern.
    pub fn uniform(incidence: &FacetIncidence, value: f64) -> Result<Self> {
        let lambda = DMatrix::from_fn(incidence.n(), incidence.m(), |i, j| {
            if incidence.is_on(i, j) {
                0.0
            } else {
                value
            }
        });
        Self::new(incidence, lambda)
    }

    pub fn zeros(incidence: &FacetIncidence) -> Self {
        Self {
            lambda: DMatrix::zeros(incidence.n(), incidence.m()),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.lambda
    }

    pub fn max(&self) -> f64 {
        self.lambda.max()
    }

    /// Multiplies every weight in the given facet columns by `factor`, then
    /// caps all weights at `cap`.
    pub fn scale_facets(&mut self, facets: &[usize], factor: f64, cap: f64) {
        for &j in facets {
            for v in self.lambda.column_mut(j).iter_mut() {
                *v = (*v * factor).min(cap);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpInstance {
    pub incidence: FacetIncidence,
    pub weights: WeightMatrix,
    /// Target dimension; a rank `d+1` solution certifies an inscription.
    pub d: usize,
}

impl SdpInstance {
    pub fn new(incidence: FacetIncidence, weights: WeightMatrix, d: usize) -> Result<Self> {
        if weights.matrix().shape() != (incidence.n(), incidence.m()) {
            return Err(Error::DimensionMismatch("weights do not match the incidence".into()));
        }
        Ok(Self {
            incidence,
            weights,
            d,
        })
    }

    pub fn size(&self) -> usize {
        1 + self.incidence.n() + self.incidence.m()
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub x: GramBorderMatrix,
    pub objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub warm_start: SplittingState,
}

/// `C = I` with `-λ_ij / 2` at both symmetric positions of `S_ij`, so that
/// `⟨C, X⟩ = tr(X) - Σ λ_ij S_ij` on symmetric `X`.
pub fn build_cost(inst: &SdpInstance) -> DMatrix<f64> {
    let n = inst.incidence.n();
    let m = inst.incidence.m();
    let mut c = DMatrix::identity(1 + n + m, 1 + n + m);
    let lambda = inst.weights.matrix();
    for i in 0..n {
        for j in 0..m {
            if !inst.incidence.is_on(i, j) {
                c[(1 + i, 1 + n + j)] = -0.5 * lambda[(i, j)];
                c[(1 + n + j, 1 + i)] = -0.5 * lambda[(i, j)];
            }
        }
    }
    c
}

/// Fixed entries of the feasible set: unit border, `A_ii = 2`, and the zero
/// pattern of `S`. With `s_floor` set, off-pattern `S_ij` are also bounded
/// below.
pub(crate) fn fixed_entries(incidence: &FacetIncidence, s_floor: Option<f64>) -> EntryConstraints {
    let n = incidence.n();
    let m = incidence.m();
    let size = 1 + n + m;
    let mut entries = EntryConstraints::new(size);
    for k in 0..size {
        entries.fix(0, k, 1.0);
    }
    for i in 0..n {
        entries.fix(1 + i, 1 + i, 2.0);
    }
    for i in 0..n {
        for j in 0..m {
            if incidence.is_on(i, j) {
                entries.fix(1 + i, 1 + n + j, 0.0);
            } else if let Some(lo) = s_floor {
                entries.bound(1 + i, 1 + n + j, lo, f64::INFINITY);
            }
        }
    }
    entries
}

pub fn solve_sdp(inst: &SdpInstance, opts: &SolverOptions) -> Result<SdpSolution> {
    solve_sdp_warm(inst, opts, None)
}

/// Like [`solve_sdp`], optionally starting from the iterates of a previous
/// solve on the same incidence.
pub fn solve_sdp_warm(
    inst: &SdpInstance,
    opts: &SolverOptions,
    warm: Option<SplittingState>,
) -> Result<SdpSolution> {
    if !(opts.rho > 0.0 && opts.tol > 0.0) {
        return Err(Error::InvalidParam("rho and tol must be positive".into()));
    }
    let cost = build_cost(inst);
    let entries = fixed_entries(&inst.incidence, None);
    let outcome = splitting::solve(&cost, &entries, opts, warm);
    let x = outcome.state.x.clone();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let objective = cost.component_mul(&x).sum();
    let x = GramBorderMatrix::new(inst.incidence.n(), inst.incidence.m(), x)?;
    Ok(SdpSolution {
        x,
        objective,
        primal_residual: outcome.primal_residual,
        dual_residual: outcome.dual_residual,
        iterations: outcome.iterations,
        converged: outcome.converged,
        warm_start: outcome.state,
    })
}
