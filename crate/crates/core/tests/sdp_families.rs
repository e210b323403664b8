use nalgebra::DMatrix;

use inscribe::families::{build_family, FamilyKind, FamilySpec};
use inscribe::numerics;
use inscribe::polytope::FacetIncidence;
use inscribe::sdp::{dual_objective, primal_objective, solve_sdp, PrimalPoint, SdpInstance, SolverOptions, WeightMatrix};

fn specs() -> Vec<FamilySpec> {
    let mut out: Vec<FamilySpec> = (3..=12).map(|n| FamilySpec::new(FamilyKind::Ngon, n).unwrap()).collect();
    for kind in [FamilyKind::Simplex, FamilyKind::Cube, FamilyKind::CrossPolytope] {
        out.extend((2..=6).map(|d| FamilySpec::new(kind, d).unwrap()));
    }
    out
}

/// Gram matrix of `e₀`, `e₀ + e_i` per vertex and `e₀ - Σ_{i ∈ F_j} e_i +
/// e_{n+j}` per facet: meets every fixed entry and is positive definite.
fn strictly_feasible(inc: &FacetIncidence) -> DMatrix<f64> {
    let (n, m) = (inc.n(), inc.m());
    let size = 1 + n + m;
    let mut f = DMatrix::zeros(size, size);
    f[(0, 0)] = 1.0;
    for i in 0..n {
        f[(1 + i, 0)] = 1.0;
        f[(1 + i, 1 + i)] = 1.0;
    }
    for j in 0..m {
        f[(1 + n + j, 0)] = 1.0;
        for i in inc.facet_vertices(j) {
            f[(1 + n + j, 1 + i)] = -1.0;
        }
        f[(1 + n + j, 1 + n + j)] = 1.0;
    }
    &f * f.transpose()
}

#[test]
fn family_solves_match_certified_optimum() {
    let opts = SolverOptions::default();
    for spec in specs() {
        let f = build_family(spec).unwrap();
        let inc = f.inscription.incidence.clone();
        let d = f.inscription.polytope.dim();
        let weights = WeightMatrix::uniform(&inc, f.lambda_bar).unwrap();
        let sol = solve_sdp(&SdpInstance::new(inc.clone(), weights.clone(), d).unwrap(), &opts).unwrap();
        let name = format!("{} {}", spec.kind.name(), spec.param);
        assert!(sol.converged, "{name}");
        assert!(sol.primal_residual <= opts.tol && sol.dual_residual <= opts.tol, "{name}");

        let optimum = f.primal_value().unwrap();
        assert!(
            (sol.objective - optimum).abs() <= 1e-5,
            "{name}: objective {} vs {optimum}",
            sol.objective
        );

        let x = sol.x.data();
        for k in 0..x.nrows() {
            assert!((x[(0, k)] - 1.0).abs() <= 1e-7, "{name}: border");
        }
        for i in 0..inc.n() {
            assert!((x[(1 + i, 1 + i)] - 2.0).abs() <= 1e-7, "{name}: diagonal");
        }
        for (i, j) in inc.zero_positions() {
            assert!(x[(1 + i, 1 + inc.n() + j)].abs() <= 1e-7, "{name}: pattern");
        }

        let mut values: Vec<f64> = numerics::sym_eig(x).unwrap().values.iter().copied().collect();
        values.sort_by(|a, b| b.total_cmp(a));
        assert!(values[d + 1] <= 1e-6 * values[0], "{name}: rank above d+1");

        // Blending the entry-feasible iterate with a strictly feasible
        // point just enough to restore PSD gives a feasible primal point,
        // which must stay above the certified dual value.
        let interior = strictly_feasible(&inc);
        let mu = numerics::min_eigenvalue(&interior).unwrap();
        assert!(mu > 0.0);
        assert!((0..interior.nrows()).all(|k| interior[(0, k)] == 1.0));
        assert!((0..inc.n()).all(|i| interior[(1 + i, 1 + i)] == 2.0));
        assert!(inc.zero_positions().iter().all(|&(i, j)| interior[(1 + i, 1 + inc.n() + j)] == 0.0));
        let delta = (-numerics::min_eigenvalue(x).unwrap()).max(0.0);
        let t = delta / (delta + mu);
        let repaired = x * (1.0 - t) + &interior * t;
        let (n, m) = (inc.n(), inc.m());
        let point = PrimalPoint {
            a: repaired.view((1, 1), (n, n)).into_owned(),
            b: repaired.view((1 + n, 1 + n), (m, m)).into_owned(),
            s: repaired.view((1, 1 + n), (n, m)).into_owned(),
        };
        let fp = primal_objective(&point, &weights);
        let fd = dual_objective(&f.certificate().unwrap(), &inc).unwrap();
        assert!(fp >= fd - 1e-7, "{name}: {fp} < {fd}");
    }
}
