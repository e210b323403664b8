//! Weight tuning against a known inscription: choose `(λ, u, w)` jointly to
//! minimize the duality gap at the inscription's Gram point.
//!
//! The variables live in the dual block
//! `Y = [[I + diag(u), M/2], [Mᵀ/2, I]] ⪰ 0`, so the gap is linear in `Y`
//! and the problem has the same entry-constrained PSD form as the primal.

use nalgebra::{DMatrix, DVector};

use super::dual::{dual_feasibility_margin, duality_gap, DualCertificate, PrimalPoint};
use super::splitting::{self, EntryConstraints, SolverOptions};
use super::WeightMatrix;
use crate::error::Result;
use crate::polytope::Inscription;

/// Per-entry weight cap, relative to the default weight `2d/n`.
const CAP_FACTOR: f64 = 100.0;

#[derive(Debug, Clone)]
pub struct LambdaStar {
    pub weights: WeightMatrix,
    pub certificate: DualCertificate,
    pub gap: f64,
    /// Whether any weight ended at the cap.
    pub cap_active: bool,
    /// Whether the tuning solve met its tolerance. The certificate is
    /// repaired to be dual feasible either way, so `gap` stays a valid bound.
    pub converged: bool,
    pub iterations: usize,
}

pub fn tune_lambda_star(insc: &Inscription, opts: &SolverOptions) -> Result<LambdaStar> {
    let inc = &insc.incidence;
    let (n, m) = (inc.n(), inc.m());
    let d = insc.polytope.dim();
    let slack = insc.slack()?.entries;
    let cap = CAP_FACTOR * 2.0 * d as f64 / n as f64;

    let size = n + m;
    let mut cost = DMatrix::zeros(size, size);
    let mut entries = EntryConstraints::new(size);
    for i in 0..n {
        cost[(i, i)] = 1.0;
        for k in i + 1..n {
            entries.fix(i, k, 0.0);
        }
        for j in 0..m {
            let c = if inc.is_on(i, j) {
                -1.0
            } else {
                entries.bound(i, n + j, -0.5 * cap, 0.0);
                -(1.0 - slack[(i, j)])
            };
            cost[(i, n + j)] = c;
            cost[(n + j, i)] = c;
        }
    }
    for j in 0..m {
        for l in j..m {
            entries.fix(n + j, n + l, if j == l { 1.0 } else { 0.0 });
        }
    }

    let outcome = splitting::solve(&cost, &entries, opts, None);
    let y = &outcome.state.x;

    let mut lambda = DMatrix::zeros(n, m);
    let mut w = Vec::with_capacity(inc.zero_count());
    for (i, j) in (0..n).flat_map(|i| (0..m).map(move |j| (i, j))) {
        if inc.is_on(i, j) {
            w.push(2.0 * y[(i, n + j)]);
        } else {
            lambda[(i, j)] = (-2.0 * y[(i, n + j)]).clamp(0.0, cap);
        }
    }
    let cap_active = lambda.iter().any(|&l| l >= cap * (1.0 - 1e-6));
    let weights = WeightMatrix::new(inc, lambda)?;
    let mut certificate = DualCertificate {
        u: DVector::from_fn(n, |i, _| y[(i, i)] - 1.0),
        w: DVector::from_vec(w),
        weights: weights.clone(),
    };
    // Raising every u_i by δ raises the Schur complement spectrum by δ.
    let margin = dual_feasibility_margin(&certificate, inc)?;
    if margin < 0.0 {
        certificate.u.add_scalar_mut(-margin);
    }
    let point = PrimalPoint::from_inscription(insc);
    let gap = duality_gap(&point, &certificate, inc)?;
    Ok(LambdaStar {
        weights,
        certificate,
        gap,
        cap_active,
        converged: outcome.converged,
        iterations: outcome.iterations,
    })
}
