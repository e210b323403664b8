//! End-to-end inscription search: SDP with constant, heuristic or
//! duality-gap-tuned weights, refined by (simplified) alternating
//! projection between the rank-`d+1` set and the constraint set.

use std::fmt;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics;
use crate::polytope::{
    extract_vertices, normalize_inscription, verify_inscription, FacetIncidence, GramBorderMatrix,
    Inscription, PolytopeVRep, TOL_FIT, TOL_SIDE,
};
use crate::sdp::{
    fixed_entries, EntryConstraints, solve_sdp_warm, tune_lambda_star, SdpInstance, SolverOptions, WeightMatrix,
};

/// Largest number of SDP solves in the heuristic weight loop; also fixes
/// the weight cap `(2d/n)(n/d)^10`.
pub const HEURISTIC_ROUNDS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    pub sdp: SolverOptions,
    /// Relative eigenvalue threshold for the reported rank.
    pub rank_tol: f64,
    /// Projection methods stop once `‖X - Y‖_F` drops to this.
    pub eps_stop: f64,
    pub ap_max_iter: usize,
    /// Projection methods also stop when the iterate verifies as an
    /// inscription, checked every this many iterations (0 disables).
    pub check_every: usize,
    /// Tolerance of the inner projection onto the constraint set.
    pub projection_tol: f64,
    pub projection_max_iter: usize,
    /// Lower bound imposed on off-pattern slack entries by the projection.
    pub eps_pos: f64,
    /// Allowed deviation of the border row when extracting vertices from a
    /// matrix that is only approximately rank `d+1`.
    pub extract_tol: f64,
    pub tol_fit: f64,
    pub tol_side: f64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            sdp: SolverOptions::default(),
            rank_tol: 1e-6,
            eps_stop: 1e-7,
            ap_max_iter: 5000,
            check_every: 10,
            projection_tol: 1e-8,
            projection_max_iter: 1000,
            eps_pos: 0.0,
            extract_tol: 0.25,
            tol_fit: TOL_FIT,
            tol_side: TOL_SIDE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Stage {
    Sdp,
    Sap,
    Ap,
}

/// How the SDP weights are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum WeightRule {
    /// Every weight `2d/n`.
    Constant,
    /// Raise the weights of mismatched facets between SDP solves.
    Heuristic,
    /// Minimize the duality gap at a known inscription.
    DualityGap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Method {
    pub stage: Stage,
    pub weights: WeightRule,
}

impl Method {
    pub const fn new(stage: Stage, weights: WeightRule) -> Self {
        Self { stage, weights }
    }

    /// The methods compared in benchmarks.
    pub const BENCH: [Method; 7] = [
        Method::new(Stage::Sdp, WeightRule::Constant),
        Method::new(Stage::Sap, WeightRule::Constant),
        Method::new(Stage::Sdp, WeightRule::Heuristic),
        Method::new(Stage::Sap, WeightRule::Heuristic),
        Method::new(Stage::Sdp, WeightRule::DualityGap),
        Method::new(Stage::Sap, WeightRule::DualityGap),
        Method::new(Stage::Ap, WeightRule::DualityGap),
    ];

    pub fn label(&self) -> String {
        let stage = match self.stage {
            Stage::Sdp => "SDP",
            Stage::Sap => "SAP",
            Stage::Ap => "AP",
        };
        let weights = match self.weights {
            WeightRule::Constant => "λc",
            WeightRule::Heuristic => "λh",
            WeightRule::DualityGap => "λ*",
        };
        format!("{stage}-{weights}")
    }

    /// Accepts labels such as `SDP-λh`, `sap-lc` or `AP-lambda*`.
    pub fn parse(label: &str) -> Option<Self> {
        let lower = label.trim().to_lowercase();
        let (stage, weights) = lower.split_once('-')?;
        let stage = match stage {
            "sdp" => Stage::Sdp,
            "sap" => Stage::Sap,
            "ap" => Stage::Ap,
            _ => return None,
        };
        let weights = weights
            .strip_prefix("lambda")
            .or_else(|| weights.strip_prefix('λ'))
            .or_else(|| weights.strip_prefix('l'))?
            .trim_start_matches('_');
        let weights = match weights {
            "c" => WeightRule::Constant,
            "h" => WeightRule::Heuristic,
            "*" | "star" => WeightRule::DualityGap,
            _ => return None,
        };
        Some(Self { stage, weights })
    }

    pub fn needs_inscription(&self) -> bool {
        self.weights == WeightRule::DualityGap
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// One step of a composite run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageSummary {
    pub method: String,
    pub inscribed: bool,
    pub iterations: usize,
    #[serde(rename = "wall_time_s", serialize_with = "seconds")]
    pub wall_time: Duration,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    pub method: String,
    pub inscribed: bool,
    #[serde(serialize_with = "vertex_rows")]
    pub vertices: Option<PolytopeVRep>,
    pub rank_at_tol: usize,
    pub iterations: usize,
    #[serde(rename = "wall_time_s", serialize_with = "seconds")]
    pub wall_time: Duration,
    /// Mismatched facets after each check, in order.
    pub bad_facet_history: Vec<Vec<usize>>,
    /// Whether the underlying iteration met its stopping rule.
    pub converged: bool,
    /// `‖X - Y‖_F` at the last projection step, when projections ran.
    pub final_gap: Option<f64>,
    /// Duality gap of tuned weights at the known inscription.
    pub tuning_gap: Option<f64>,
    pub stages: Vec<StageSummary>,
    /// Final matrix, kept to seed later stages.
    #[serde(skip)]
    pub solution: Option<GramBorderMatrix>,
}

impl PipelineReport {
    pub fn summary(&self) -> StageSummary {
        StageSummary {
            method: self.method.clone(),
            inscribed: self.inscribed,
            iterations: self.iterations,
            wall_time: self.wall_time,
        }
    }
}

fn seconds<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

fn vertex_rows<S: serde::Serializer>(
    v: &Option<PolytopeVRep>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.collect_seq(v.to_rows()),
        None => s.serialize_none(),
    }
}

/// Outcome of checking a matrix for an inscription.
#[derive(Debug, Clone)]
pub struct Assessment {
    pub inscribed: bool,
    pub vertices: Option<PolytopeVRep>,
    pub bad_facets: Vec<usize>,
    pub rank: usize,
}

/// Extracts unit vertices from the top `d+1` eigenpairs of `x` and matches
/// them against `incidence`.
pub fn assess(
    x: &GramBorderMatrix,
    incidence: &FacetIncidence,
    d: usize,
    opts: &PipelineOptions,
) -> Assessment {
    let rank = numerics::numeric_rank(x.data(), opts.rank_tol).unwrap_or(x.size());
    match extract_vertices(x, d, opts.extract_tol) {
        Ok(v) => {
            let report = verify_inscription(&v, incidence, opts.tol_fit, opts.tol_side);
            Assessment {
                inscribed: report.ok,
                vertices: Some(v),
                bad_facets: report.bad_facets,
                rank,
            }
        }
        Err(_) => Assessment {
            inscribed: false,
            vertices: None,
            bad_facets: (0..incidence.m()).collect(),
            rank,
        },
    }
}

#[derive(Debug, Clone)]
pub struct Projection {
    pub x: GramBorderMatrix,
    pub iterations: usize,
    pub converged: bool,
}

/// Nearest point of `PSD ∩ {border = 1, A_ii = 2, S = 0 on the pattern,
/// S ≥ eps_pos off it}` by Dykstra's alternating projections. The result
/// satisfies the entry constraints exactly and is PSD to within `tol`.
pub fn project_onto_constraints(
    x: &GramBorderMatrix,
    incidence: &FacetIncidence,
    eps_pos: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Projection> {
    if x.n() != incidence.n() || x.m() != incidence.m() {
        return Err(Error::DimensionMismatch("matrix blocks do not match the incidence".into()));
    }
    let entries = fixed_entries(incidence, Some(eps_pos));
    let (y, iterations, converged) = dykstra(x.data().clone(), &entries, tol, max_iter);
    Ok(Projection {
        x: GramBorderMatrix::new(incidence.n(), incidence.m(), y)?,
        iterations,
        converged,
    })
}

/// Dykstra alternation between the PSD cone and the entry set, ending on
/// the entry set.
fn dykstra(
    mut y: DMatrix<f64>,
    entries: &EntryConstraints,
    tol: f64,
    max_iter: usize,
) -> (DMatrix<f64>, usize, bool) {
    let size = y.nrows();
    let mut p = DMatrix::zeros(size, size);
    let mut q = DMatrix::zeros(size, size);
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let z = numerics::psd_project_symmetric(&y + &p);
        p += &y - &z;
        let mut next = &z + &q;
        entries.project(&mut next);
        q += &z - &next;
        let change = (&next - &y).norm();
        let infeasibility = (&next - &z).norm();
        y = next;
        if change <= tol && infeasibility <= tol {
            return (y, iterations, true);
        }
    }
    if iterations == 0 {
        entries.project(&mut y);
    }
    (y, iterations, false)
}

fn check_shapes(x0: &GramBorderMatrix, incidence: &FacetIncidence, d: usize) -> Result<()> {
    if x0.n() != incidence.n() || x0.m() != incidence.m() {
        return Err(Error::DimensionMismatch("matrix blocks do not match the incidence".into()));
    }
    if d + 1 > x0.size() {
        return Err(Error::InvalidParam(format!("dimension {d} too large for the matrix")));
    }
    Ok(())
}

/// Alternates a rank-`d+1` truncation with the exact projection onto the
/// constraint set until the two agree to `eps_stop`.
pub fn alternating_projection(
    x0: &GramBorderMatrix,
    incidence: &FacetIncidence,
    d: usize,
    opts: &PipelineOptions,
) -> Result<PipelineReport> {
    let entries = fixed_entries(incidence, Some(opts.eps_pos));
    projection_loop(x0, incidence, d, opts, Stage::Ap, |y| {
        dykstra(y, &entries, opts.projection_tol, opts.projection_max_iter).0
    })
}

/// Like [`alternating_projection`], but the constraint step only resets the
/// border, the diagonal of `A` and the pattern zeros of `S`.
pub fn simplified_ap(
    x0: &GramBorderMatrix,
    incidence: &FacetIncidence,
    d: usize,
    opts: &PipelineOptions,
) -> Result<PipelineReport> {
    let entries = fixed_entries(incidence, None);
    projection_loop(x0, incidence, d, opts, Stage::Sap, |mut y| {
        entries.project(&mut y);
        y
    })
}

fn projection_loop(
    x0: &GramBorderMatrix,
    incidence: &FacetIncidence,
    d: usize,
    opts: &PipelineOptions,
    stage: Stage,
    mut constrain: impl FnMut(DMatrix<f64>) -> DMatrix<f64>,
) -> Result<PipelineReport> {
    check_shapes(x0, incidence, d)?;
    let start = Instant::now();
    let mut x = x0.data().clone();
    let mut gap = None;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.ap_max_iter {
        iterations += 1;
        let y = numerics::rank_truncate_symmetric(x.clone(), d + 1);
        x = constrain(y.clone());
        let e = (&x - &y).norm();
        gap = Some(e);
        if !e.is_finite() {
            break;
        }
        if e <= opts.eps_stop {
            converged = true;
            break;
        }
        if opts.check_every > 0 && iterations % opts.check_every == 0 {
            let snapshot = GramBorderMatrix::new(incidence.n(), incidence.m(), x.clone())?;
            if assess(&snapshot, incidence, d, opts).inscribed {
                break;
            }
        }
    }
    let x = GramBorderMatrix::new(incidence.n(), incidence.m(), x)?;
    let check = assess(&x, incidence, d, opts);
    let method = match stage {
        Stage::Sap => "SAP",
        Stage::Ap => "AP",
        Stage::Sdp => "SDP",
    };
    Ok(PipelineReport {
        method: method.to_string(),
        inscribed: check.inscribed,
        vertices: check.vertices,
        rank_at_tol: check.rank,
        iterations,
        wall_time: start.elapsed(),
        bad_facet_history: vec![check.bad_facets],
        converged,
        final_gap: gap,
        tuning_gap: None,
        stages: Vec::new(),
        solution: Some(x),
    })
}

fn sdp_report(
    label: String,
    incidence: &FacetIncidence,
    d: usize,
    weights: WeightMatrix,
    opts: &PipelineOptions,
) -> Result<PipelineReport> {
    let start = Instant::now();
    let inst = SdpInstance::new(incidence.clone(), weights, d)?;
    let sol = solve_sdp_warm(&inst, &opts.sdp, None)?;
    let check = assess(&sol.x, incidence, d, opts);
    let inscribed = sol.converged && check.inscribed;
    Ok(PipelineReport {
        method: label,
        inscribed,
        vertices: check.vertices,
        rank_at_tol: check.rank,
        iterations: sol.iterations,
        wall_time: start.elapsed(),
        bad_facet_history: vec![check.bad_facets],
        converged: sol.converged,
        final_gap: None,
        tuning_gap: None,
        stages: Vec::new(),
        solution: Some(sol.x),
    })
}

/// Repeated SDP solves starting from uniform weights `2d/n`; after each
/// solve the weights of every mismatched facet are multiplied by `n/d`,
/// capped at `(2d/n)(n/d)^10`. Stops at the first inscription, after
/// [`HEURISTIC_ROUNDS`] solves, or when a solve fails to converge.
pub fn tune_lambda_heuristic(
    incidence: &FacetIncidence,
    d: usize,
    opts: &PipelineOptions,
) -> Result<PipelineReport> {
    let start = Instant::now();
    let (n, nf, df) = (incidence.n(), incidence.n() as f64, d as f64);
    if n < d + 1 {
        return Err(Error::InvalidParam(format!("{n} vertices cannot span dimension {d}")));
    }
    let initial = 2.0 * df / nf;
    let growth = nf / df;
    let cap = initial * growth.powi(HEURISTIC_ROUNDS as i32);
    let mut weights = WeightMatrix::uniform(incidence, initial)?;
    let mut warm = None;
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut last = None;
    for _ in 0..HEURISTIC_ROUNDS {
        let inst = SdpInstance::new(incidence.clone(), weights.clone(), d)?;
        let sol = solve_sdp_warm(&inst, &opts.sdp, warm.take())?;
        iterations += sol.iterations;
        let check = assess(&sol.x, incidence, d, opts);
        history.push(check.bad_facets.clone());
        let done = !sol.converged || check.inscribed;
        let inscribed = sol.converged && check.inscribed;
        warm = Some(sol.warm_start);
        last = Some((sol.x, check, inscribed, sol.converged));
        if done {
            break;
        }
        let bad = &last.as_ref().expect("set above").1.bad_facets;
        weights.scale_facets(bad, growth, cap);
    }
    let (x, check, inscribed, converged) = last.expect("at least one round");
    Ok(PipelineReport {
        method: Method::new(Stage::Sdp, WeightRule::Heuristic).label(),
        inscribed,
        vertices: check.vertices,
        rank_at_tol: check.rank,
        iterations,
        wall_time: start.elapsed(),
        bad_facet_history: history,
        converged,
        final_gap: None,
        tuning_gap: None,
        stages: Vec::new(),
        solution: Some(x),
    })
}

/// Heuristic-weight SDP, then simplified and full alternating projection
/// from its solution, stopping at the first inscription. A report without
/// an inscription says nothing about non-inscribability.
pub fn run_procedure(
    incidence: &FacetIncidence,
    d: usize,
    opts: &PipelineOptions,
) -> Result<PipelineReport> {
    let mut report = tune_lambda_heuristic(incidence, d, opts)?;
    let mut stages = vec![report.summary()];
    if !report.inscribed {
        let x0 = report.solution.clone().expect("SDP reports carry their solution");
        for (stage, weights) in [(Stage::Sap, WeightRule::Heuristic), (Stage::Ap, WeightRule::Heuristic)] {
            let mut next = match stage {
                Stage::Sap => simplified_ap(&x0, incidence, d, opts)?,
                _ => alternating_projection(&x0, incidence, d, opts)?,
            };
            next.method = Method::new(stage, weights).label();
            stages.push(next.summary());
            report = next;
            if report.inscribed {
                break;
            }
        }
    }
    report.wall_time = stages.iter().map(|s| s.wall_time).sum();
    report.stages = stages;
    Ok(report)
}

/// Normalizes a known inscription so that the origin is interior.
pub fn prepare_inscription(vertices: &PolytopeVRep, incidence: &FacetIncidence) -> Result<Inscription> {
    let normalized = normalize_inscription(vertices)?;
    Inscription::fit(normalized, incidence.clone())
}

/// Runs one benchmark method. Projection stages start from the SDP
/// solution with the same weights and return it unchanged when it is
/// already an inscription. Duality-gap weights need `known`.
pub fn run_method(
    method: Method,
    incidence: &FacetIncidence,
    d: usize,
    known: Option<&Inscription>,
    opts: &PipelineOptions,
) -> Result<PipelineReport> {
    let start = Instant::now();
    let sdp_label = Method::new(Stage::Sdp, method.weights).label();
    let mut sdp = match method.weights {
        WeightRule::Constant => {
            let w = WeightMatrix::uniform(incidence, 2.0 * d as f64 / incidence.n() as f64)?;
            sdp_report(sdp_label, incidence, d, w, opts)?
        }
        WeightRule::Heuristic => tune_lambda_heuristic(incidence, d, opts)?,
        WeightRule::DualityGap => {
            let insc = known.ok_or_else(|| {
                Error::Precondition(format!("{method} needs a known inscription"))
            })?;
            if insc.incidence != *incidence {
                return Err(Error::Precondition(
                    "known inscription has a different incidence".into(),
                ));
            }
            let tuned = tune_lambda_star(insc, &opts.sdp)?;
            let mut report = sdp_report(sdp_label, incidence, d, tuned.weights, opts)?;
            report.tuning_gap = Some(tuned.gap);
            report
        }
    };
    sdp.wall_time = start.elapsed();
    if method.stage == Stage::Sdp {
        return Ok(sdp);
    }
    let mut stages = vec![sdp.summary()];
    let tuning_gap = sdp.tuning_gap;
    let mut report = if sdp.inscribed {
        sdp
    } else {
        let x0 = sdp.solution.as_ref().expect("SDP reports carry their solution");
        let mut next = match method.stage {
            Stage::Sap => simplified_ap(x0, incidence, d, opts)?,
            _ => alternating_projection(x0, incidence, d, opts)?,
        };
        next.method = method.label();
        stages.push(next.summary());
        next
    };
    report.method = method.label();
    report.tuning_gap = tuning_gap;
    report.wall_time = start.elapsed();
    report.stages = stages;
    Ok(report)
}
