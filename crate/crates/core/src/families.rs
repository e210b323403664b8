//! Closed-form inscriptions with optimal uniform dual certificates for four
//! facet-transitive families: regular polygons, simplices, cubes and
//! cross-polytopes.
//!
//! Orderings:
//! - n-gon: vertex `i` at angle `2πi/n`; facet `i` holds vertices `i, i+1`.
//! - simplex: facet `i` holds every vertex except `i`.
//! - cube: vertices are sign vectors over `√d`, in binary-counter order
//!   (bit `d-1-k` set means coordinate `k` is negative); facets `+e_1..+e_d`
//!   then `-e_1..-e_d`.
//! - cross-polytope: vertices `e_1..e_d, -e_1..-e_d`; facets are sign vectors
//!   in the same binary-counter order.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numerics;
use crate::polytope::{FacetIncidence, Inscription, PolytopeVRep};
use crate::sdp::{dual_matrix, DualCertificate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    Ngon,
    Simplex,
    Cube,
    CrossPolytope,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Ngon => "ngon",
            FamilyKind::Simplex => "simplex",
            FamilyKind::Cube => "cube",
            FamilyKind::CrossPolytope => "cross_polytope",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ngon" => Some(FamilyKind::Ngon),
            "simplex" => Some(FamilyKind::Simplex),
            "cube" => Some(FamilyKind::Cube),
            "cross_polytope" | "cross-polytope" | "cross" => Some(FamilyKind::CrossPolytope),
            _ => None,
        }
    }
}

/// A family member: `param` is the vertex count for polygons and the
/// dimension otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub param: usize,
}

impl FamilySpec {
    pub fn new(kind: FamilyKind, param: usize) -> Result<Self> {
        let min = if kind == FamilyKind::Ngon { 3 } else { 2 };
        if param < min {
            return Err(Error::InvalidParam(format!(
                "{} needs parameter >= {min}, got {param}",
                kind.name()
            )));
        }
        // Cubes and cross-polytopes have 2^d vertices or facets.
        if matches!(kind, FamilyKind::Cube | FamilyKind::CrossPolytope) && param > 12 {
            return Err(Error::InvalidParam(format!(
                "{} of dimension {param} is too large",
                kind.name()
            )));
        }
        Ok(Self { kind, param })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyCertificate {
    pub spec: FamilySpec,
    pub lambda_bar: f64,
    pub u_bar: f64,
    pub w_bar: f64,
    /// Closed-form largest eigenvalue of `MMᵀ`.
    pub lambda_max_closed_form: f64,
    /// Common squared norm of the facet normals.
    pub h_norm_sq: f64,
    pub inscription: Inscription,
}

impl FamilyCertificate {
    pub fn certificate(&self) -> Result<DualCertificate> {
        DualCertificate::uniform(&self.inscription.incidence, self.u_bar, self.w_bar, self.lambda_bar)
    }

    /// Primal objective at the inscription's Gram point with uniform weight
    /// `λ̄`: `2n + m + Σ‖h‖² - λ̄ Σ_{off} S + 1`.
    pub fn primal_value(&self) -> Result<f64> {
        let inc = &self.inscription.incidence;
        let slack = self.inscription.slack()?.entries;
        let (n, m) = (inc.n(), inc.m());
        Ok((2 * n + m) as f64 + self.inscription.normal_norm_sq_sum() - self.lambda_bar * slack.sum()
            + 1.0)
    }
}

pub fn build_family(spec: FamilySpec) -> Result<FamilyCertificate> {
    let spec = FamilySpec::new(spec.kind, spec.param)?;
    let p = spec.param;
    let pf = p as f64;
    let (vertices, facets, lambda_bar, u_bar, w_bar, lambda_max, h_norm_sq): (_, Vec<Vec<usize>>, _, _, _, _, _) =
        match spec.kind {
        FamilyKind::Ngon => {
            let c2 = (PI / pf).cos().powi(2);
            let vertices = DMatrix::from_fn(2, p, |r, i| {
                let t = 2.0 * PI * i as f64 / pf;
                if r == 0 { t.cos() } else { t.sin() }
            });
            let facets = (0..p).map(|i| vec![i, (i + 1) % p]).collect();
            (
                vertices,
                facets,
                2.0 / (pf * c2),
                (PI / pf).tan().powi(2),
                (pf - 2.0) / (pf * c2),
                4.0 / c2,
                1.0 / c2,
            )
        }
        FamilyKind::Simplex => (
            simplex_vertices(p),
            (0..=p).map(|i| (0..=p).filter(|&k| k != i).collect()).collect(),
            2.0 * pf * pf / (pf + 1.0),
            pf * pf - 1.0,
            2.0 * pf / (pf + 1.0),
            4.0 * pf * pf,
            pf * pf,
        ),
        FamilyKind::Cube => {
            let signs = sign_vectors(p);
            let vertices = signs.clone() / pf.sqrt();
            let facets = (0..2 * p)
                .map(|f| {
                    let (k, s) = (f % p, if f < p { 1.0 } else { -1.0 });
                    (0..signs.ncols()).filter(|&i| signs[(k, i)] == s).collect()
                })
                .collect();
            let scale = 2f64.powi(1 - p as i32);
            (
                vertices,
                facets,
                pf * scale,
                -1.0 + pf * pf * scale,
                pf * scale,
                pf * pf * 2f64.powi(3 - p as i32),
                pf,
            )
        }
        FamilyKind::CrossPolytope => {
            let mut vertices = DMatrix::zeros(p, 2 * p);
            for k in 0..p {
                vertices[(k, k)] = 1.0;
                vertices[(k, p + k)] = -1.0;
            }
            let signs = sign_vectors(p);
            let facets = (0..signs.ncols())
                .map(|f| {
                    (0..p)
                        .map(|k| if signs[(k, f)] > 0.0 { k } else { p + k })
                        .collect()
                })
                .collect();
            (
                vertices,
                facets,
                1.0,
                2f64.powi(p as i32 - 1) - 1.0,
                1.0,
                2f64.powi(p as i32 + 1),
                pf,
            )
        }
    };
    let polytope = PolytopeVRep::from_matrix(vertices)?;
    let d = polytope.dim();
    let incidence = FacetIncidence::from_facets(polytope.len(), &facets, d)?;
    let inscription = Inscription::fit(polytope, incidence)?;
    Ok(FamilyCertificate {
        spec,
        lambda_bar,
        u_bar,
        w_bar,
        lambda_max_closed_form: lambda_max,
        h_norm_sq,
        inscription,
    })
}

/// `λ_max(MMᵀ)` by eigensolve of the assembled dual matrix.
pub fn family_lambda_max_numeric(cert: &FamilyCertificate) -> Result<f64> {
    let m = dual_matrix(&cert.certificate()?, &cert.inscription.incidence)?;
    numerics::max_eigenvalue(&(&m * m.transpose()))
}

/// Unit vectors with pairwise inner product `-1/d`: the centered standard
/// basis of `R^{d+1}` written in an orthonormal basis of the sum-zero
/// hyperplane.
fn simplex_vertices(d: usize) -> DMatrix<f64> {
    let dim = d + 1;
    let mut out = DMatrix::zeros(d, dim);
    for i in 0..dim {
        let mut e = DVector::from_element(dim, -1.0 / dim as f64);
        e[i] += 1.0;
        e.normalize_mut();
        for k in 1..=d {
            let kf = k as f64;
            let norm = (kf * (kf + 1.0)).sqrt();
            let dot: f64 = (0..k).map(|t| e[t]).sum::<f64>() - kf * e[k];
            out[(k - 1, i)] = dot / norm;
        }
    }
    out
}

/// All `2^d` sign vectors as columns, in binary-counter order.
fn sign_vectors(d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(d, 1 << d, |k, i| {
        if (i >> (d - 1 - k)) & 1 == 0 { 1.0 } else { -1.0 }
    })
}
