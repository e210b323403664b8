//! Two-set consensus splitting for `min ⟨C, X⟩` over the intersection of the
//! PSD cone with a set that only constrains individual entries.
//!
//! Because the entry set fixes or boxes single coordinates, its Euclidean
//! projection is coordinatewise, and each iteration costs one symmetric
//! eigendecomposition.

use nalgebra::DMatrix;

use crate::numerics;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum EntryRule {
    Fixed(f64),
    Range(f64, f64),
}

/// Constraints on individual (symmetric) entries; everything else is free.
#[derive(Debug, Clone)]
pub(crate) struct EntryConstraints {
    size: usize,
    rules: Vec<(usize, usize, EntryRule)>,
}

impl EntryConstraints {
    pub fn new(size: usize) -> Self {
        Self {
            size,
            rules: Vec::new(),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn fix(&mut self, i: usize, j: usize, value: f64) {
        self.rules.push((i, j, EntryRule::Fixed(value)));
    }

    pub fn bound(&mut self, i: usize, j: usize, lo: f64, hi: f64) {
        self.rules.push((i, j, EntryRule::Range(lo, hi)));
    }

    /// In-place projection of a symmetric matrix.
    pub fn project(&self, x: &mut DMatrix<f64>) {
        for &(i, j, rule) in &self.rules {
            let v = match rule {
                EntryRule::Fixed(v) => v,
                EntryRule::Range(lo, hi) => x[(i, j)].clamp(lo, hi),
            };
            x[(i, j)] = v;
            x[(j, i)] = v;
        }
    }

    /// Largest violation of any rule.
    #[cfg(test)]
    pub fn violation(&self, x: &DMatrix<f64>) -> f64 {
        self.rules
            .iter()
            .map(|&(i, j, rule)| {
                let worst = |val: f64| match rule {
                    EntryRule::Fixed(t) => (val - t).abs(),
                    EntryRule::Range(lo, hi) => (lo - val).max(val - hi).max(0.0),
                };
                worst(x[(i, j)]).max(worst(x[(j, i)]))
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Initial penalty parameter ρ.
    pub rho: f64,
    /// Absolute tolerance on both the primal and the dual residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Every `ADAPT_EVERY` iterations, double or halve ρ when one relative
    /// residual exceeds the other by `BALANCE_RATIO`.
    pub adaptive_rho: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rho: 1.0,
            // Tight enough that the objective of the largest family
            // instances lands within 1e-5 of the certified optimum.
            tol: 5e-8,
            max_iter: 50_000,
            adaptive_rho: true,
        }
    }
}

const BALANCE_RATIO: f64 = 2.0;
const RHO_STEP: f64 = 2.0;
/// Over-relaxation factor.
const RELAXATION: f64 = 1.8;
/// Iterations between ρ updates.
const ADAPT_EVERY: usize = 50;

/// Iterates of the splitting method; reusable as a warm start for a nearby
/// problem with the same entry structure.
#[derive(Debug, Clone)]
pub struct SplittingState {
    /// Entry-feasible iterate.
    pub(crate) x: DMatrix<f64>,
    /// PSD iterate.
    pub(crate) z: DMatrix<f64>,
    /// Scaled dual variable, `Y / ρ`.
    pub(crate) u: DMatrix<f64>,
    pub(crate) rho: f64,
}

impl SplittingState {
    pub(crate) fn zeros(size: usize) -> Self {
        Self {
            x: DMatrix::zeros(size, size),
            z: DMatrix::zeros(size, size),
            u: DMatrix::zeros(size, size),
            rho: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct SplittingOutcome {
    pub state: SplittingState,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) fn solve(
    cost: &DMatrix<f64>,
    entries: &EntryConstraints,
    opts: &SolverOptions,
    warm: Option<SplittingState>,
) -> SplittingOutcome {
    let size = entries.size();
    let mut state = warm
        .filter(|s| s.z.nrows() == size && s.rho > 0.0)
        .unwrap_or_else(|| {
            let mut cold = SplittingState::zeros(size);
            entries.project(&mut cold.x);
            cold.rho = opts.rho;
            cold
        });
    if !opts.adaptive_rho && state.rho != opts.rho {
        state.u *= state.rho / opts.rho;
        state.rho = opts.rho;
    }
    let mut primal_residual = f64::INFINITY;
    let mut dual_residual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        let mut x = &state.z - &state.u - cost / state.rho;
        entries.project(&mut x);
        let relaxed = &x * RELAXATION + &state.z * (1.0 - RELAXATION);
        let z = numerics::psd_project_symmetric(&relaxed + &state.u);
        state.u += &relaxed - &z;
        primal_residual = (&x - &z).norm();
        dual_residual = state.rho * (&z - &state.z).norm();
        state.x = x;
        state.z = z;
        if !primal_residual.is_finite() || !dual_residual.is_finite() {
            break;
        }
        if primal_residual <= opts.tol && dual_residual <= opts.tol {
            converged = true;
            break;
        }
        if opts.adaptive_rho && iterations % ADAPT_EVERY == 0 {
            // Residuals relative to the sizes of the primal and dual iterates.
            let primal_rel = primal_residual / state.z.norm().max(f64::MIN_POSITIVE);
            let dual_rel = dual_residual / (state.rho * state.u.norm()).max(f64::MIN_POSITIVE);
            let scale = if primal_rel > BALANCE_RATIO * dual_rel {
                RHO_STEP
            } else if dual_rel > BALANCE_RATIO * primal_rel {
                1.0 / RHO_STEP
            } else {
                1.0
            };
            if scale != 1.0 {
                state.rho *= scale;
                state.u /= scale;
            }
        }
    }
    SplittingOutcome {
        state,
        primal_residual,
        dual_residual,
        iterations,
        converged,
    }
}
