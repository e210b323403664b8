//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. `ACCEPTANCE_ONLY=3,6` restricts the run.

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use inscribe::bench::{generate_instances, Instance};
use inscribe::families::{build_family, family_lambda_max_numeric, FamilyCertificate, FamilyKind, FamilySpec};
use inscribe::numerics::{self, psd_project};
use inscribe::pipeline::{
    alternating_projection, prepare_inscription, run_method, simplified_ap, Method, PipelineOptions, Stage,
    WeightRule,
};
use inscribe::polytope::{
    count_types, extract_vertices, facet_enumeration, normalize_inscription, random_inscribed, verify_inscription,
    GramBorderMatrix, Inscription, TOL_FIT, TOL_SIDE,
};
use inscribe::sdp::{
    check_dual_feasible, dual_feasibility_margin, dual_matrix, duality_gap, solve_sdp, DualCertificate,
    PrimalPoint, SdpInstance, SolverOptions, WeightMatrix,
};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(failures: Vec<String>, ok_detail: String) -> Verdict {
    if failures.is_empty() {
        Verdict { pass: true, detail: ok_detail }
    } else {
        Verdict {
            pass: false,
            detail: failures.join("; "),
        }
    }
}

fn family_specs() -> Vec<FamilySpec> {
    let mut specs: Vec<FamilySpec> = (3..=12).map(|n| FamilySpec::new(FamilyKind::Ngon, n).unwrap()).collect();
    for kind in [FamilyKind::Simplex, FamilyKind::Cube, FamilyKind::CrossPolytope] {
        specs.extend((2..=6).map(|d| FamilySpec::new(kind, d).unwrap()));
    }
    specs
}

fn label(spec: &FamilySpec) -> String {
    format!("{} {}", spec.kind.name(), spec.param)
}

fn lambda_max_oracle(spec: &FamilySpec) -> f64 {
    let p = spec.param as f64;
    match spec.kind {
        FamilyKind::Ngon => 4.0 / (PI / p).cos().powi(2),
        FamilyKind::Simplex => 4.0 * p * p,
        FamilyKind::Cube => p * p * 2f64.powf(3.0 - p),
        FamilyKind::CrossPolytope => 2f64.powf(p + 1.0),
    }
}

fn family_certificates() -> Verdict {
    let mut failures = Vec::new();
    let mut slowest = 0.0f64;
    for spec in family_specs() {
        let start = Instant::now();
        let f = build_family(spec).unwrap();
        let inc = &f.inscription.incidence;
        let cert = f.certificate().unwrap();
        let margin = dual_feasibility_margin(&cert, inc).unwrap();
        let fp = f.primal_value().unwrap();
        let gap = duality_gap(&PrimalPoint::from_inscription(&f.inscription), &cert, inc).unwrap();
        let m = dual_matrix(&cert, inc).unwrap();
        let lmax = numerics::max_eigenvalue(&(&m * m.transpose())).unwrap();
        let k = inc.uniform_facet_size().unwrap() as f64;
        let (n, mf) = (inc.n() as f64, inc.m() as f64);
        let eq7 = n * (1.0 + f.u_bar) + mf * f.h_norm_sq - (f.lambda_bar + f.w_bar) * k * mf;
        let elapsed = start.elapsed().as_secs_f64();
        slowest = slowest.max(elapsed);
        let name = label(&spec);
        if margin < -1e-9 || !check_dual_feasible(&cert, inc, 1e-9) {
            failures.push(format!("{name}: margin {margin:e}"));
        }
        if gap.abs() > 1e-8 * (1.0 + fp.abs()) {
            failures.push(format!("{name}: gap {gap:e}"));
        }
        if (lmax - (4.0 + 4.0 * f.u_bar)).abs() > 1e-8 {
            failures.push(format!("{name}: eigenvalue bound off by {:e}", lmax - 4.0 - 4.0 * f.u_bar));
        }
        if eq7.abs() > 1e-9 {
            failures.push(format!("{name}: zero-gap equation off by {eq7:e}"));
        }
        if elapsed >= 1.0 {
            failures.push(format!("{name}: {elapsed:.2}s"));
        }
    }
    verdict(failures, format!("25 families, slowest {slowest:.3}s"))
}

fn eigenvalue_oracles() -> Verdict {
    let mut failures = Vec::new();
    for spec in family_specs() {
        let f = build_family(spec).unwrap();
        let numeric = family_lambda_max_numeric(&f).unwrap();
        let oracle = lambda_max_oracle(&spec);
        if (numeric - oracle).abs() > 1e-9 * oracle {
            failures.push(format!("{}: numeric {numeric} vs {oracle}", label(&spec)));
        }
    }
    let square: Vec<FamilyCertificate> = [(FamilyKind::Ngon, 4), (FamilyKind::CrossPolytope, 2), (FamilyKind::Cube, 2)]
        .into_iter()
        .map(|(k, p)| build_family(FamilySpec::new(k, p).unwrap()).unwrap())
        .collect();
    let scalars = |f: &FamilyCertificate| {
        [f.lambda_bar, f.u_bar, f.w_bar, f.lambda_max_closed_form, f.h_norm_sq, family_lambda_max_numeric(f).unwrap()]
    };
    let base = scalars(&square[0]);
    for other in &square[1..] {
        for (a, b) in base.iter().zip(scalars(other)) {
            if (a - b).abs() > 1e-12 {
                failures.push(format!("square certificates differ: {a} vs {b} ({})", label(&other.spec)));
            }
        }
    }
    verdict(failures, "25 closed forms matched, square certificates identical".into())
}

fn sdp_rank_recovery() -> Verdict {
    let mut failures = Vec::new();
    let mut slowest = 0.0f64;
    for spec in family_specs() {
        let name = label(&spec);
        let f = build_family(spec).unwrap();
        let inc = f.inscription.incidence.clone();
        let d = f.inscription.polytope.dim();
        let start = Instant::now();
        let weights = WeightMatrix::uniform(&inc, f.lambda_bar).unwrap();
        let sol = solve_sdp(&SdpInstance::new(inc.clone(), weights, d).unwrap(), &SolverOptions::default()).unwrap();
        let elapsed = start.elapsed().as_secs_f64();
        slowest = slowest.max(elapsed);
        let mut values: Vec<f64> = numerics::sym_eig(sol.x.data()).unwrap().values.iter().copied().collect();
        values.sort_by(|a, b| b.total_cmp(a));
        if values[d + 1] > 1e-6 * values[0] {
            failures.push(format!("{name}: eigenvalue {} = {:e} vs top {:e}", d + 2, values[d + 1], values[0]));
        }
        match extract_vertices(&sol.x, d, 0.25) {
            Ok(v) => {
                if !verify_inscription(&v, &inc, TOL_FIT, TOL_SIDE).ok {
                    failures.push(format!("{name}: extracted vertices do not verify"));
                }
            }
            Err(e) => failures.push(format!("{name}: extraction failed: {e}")),
        }
        if !sol.converged {
            failures.push(format!("{name}: not converged"));
        }
        if elapsed >= 10.0 {
            failures.push(format!("{name}: {elapsed:.2}s"));
        }
    }
    verdict(failures, format!("25 families at rank d+1, slowest {slowest:.2}s"))
}

const C: WeightRule = WeightRule::Constant;
const H: WeightRule = WeightRule::Heuristic;
const STAR: WeightRule = WeightRule::DualityGap;

/// Method runs on the seeded n = 8, d = 5 set, shared by the reproduction
/// and dominance criteria.
struct Runs {
    methods: Vec<Method>,
    /// `inscribed[instance][method]`; `None` when the run errored.
    inscribed: Vec<Vec<Option<bool>>>,
}

impl Runs {
    fn solved(&self, method: Method) -> usize {
        let k = self.methods.iter().position(|&m| m == method).unwrap();
        self.inscribed.iter().filter(|row| row[k] == Some(true)).count()
    }

    fn flag(&self, instance: usize, method: Method) -> Option<bool> {
        let k = self.methods.iter().position(|&m| m == method).unwrap();
        self.inscribed[instance][k]
    }
}

fn n8d5_runs() -> Runs {
    let mut methods = Method::BENCH.to_vec();
    methods.push(Method::new(Stage::Ap, H));
    let instances = generate_instances(8, 5, 20, 1).unwrap();
    let opts = PipelineOptions::default();
    let run = |inst: &Instance| -> Vec<Option<bool>> {
        let known = prepare_inscription(&inst.vertices, &inst.incidence).ok();
        methods
            .iter()
            .map(|&m| run_method(m, &inst.incidence, inst.d, known.as_ref(), &opts).ok().map(|r| r.inscribed))
            .collect()
    };
    let inscribed = instances.par_iter().map(run).collect();
    Runs { methods, inscribed }
}

fn n8d5_reproduction(runs: &Runs) -> Verdict {
    let heuristic = runs.solved(Method::new(Stage::Sdp, H));
    let ap_star = runs.solved(Method::new(Stage::Ap, STAR));
    let detail = runs
        .methods
        .iter()
        .map(|&m| format!("{m} {}/20", runs.solved(m)))
        .collect::<Vec<_>>()
        .join(", ");
    Verdict {
        pass: heuristic >= 10 && ap_star >= 18,
        detail,
    }
}

fn dominance(runs: &Runs) -> Verdict {
    let mut failures = Vec::new();
    let mut checked = 0;
    for i in 0..runs.inscribed.len() {
        for weights in [C, H, STAR] {
            let base = runs.flag(i, Method::new(Stage::Sdp, weights));
            for stage in [Stage::Sap, Stage::Ap] {
                let method = Method::new(stage, weights);
                if !runs.methods.contains(&method) {
                    continue;
                }
                let flag = runs.flag(i, method);
                checked += 1;
                if base == Some(true) && flag != Some(true) {
                    failures.push(format!("instance {i}: {method} {flag:?} below SDP"));
                }
            }
        }
    }
    verdict(failures, format!("{checked} pairs over 20 instances"))
}

fn count_formulas() -> Verdict {
    let expected = [((8, 5), 8), ((8, 6), 3), ((9, 6), 18), ((9, 7), 3), ((10, 7), 29), ((10, 8), 4)];
    let failures: Vec<String> = expected
        .iter()
        .filter_map(|&((n, d), want)| match count_types(n, d) {
            Ok(got) if got == want => None,
            other => Some(format!("({n},{d}): {other:?}, expected {want}")),
        })
        .collect();
    verdict(failures, "6 counts exact".into())
}

fn random_inscription(n: usize, d: usize, seed: u64) -> Option<Inscription> {
    let (v, inc) = random_inscribed(n, d, seed).unwrap();
    let v = normalize_inscription(&v).ok()?;
    Inscription::fit(v, inc).ok()
}

fn weak_duality(failures: &mut Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut pairs = 0;
    let mut seed = 5000;
    while pairs < 200 {
        let (n, d) = [(5, 3), (6, 3), (7, 4), (8, 5), (9, 5)][pairs % 5];
        seed += 1;
        let Some(insc) = random_inscription(n, d, seed) else { continue };
        let inc = insc.incidence.clone();
        let mut point = PrimalPoint::from_inscription(&insc);
        let g = DVector::from_fn(inc.m(), |_, _| rng.random_range(-1.0..1.0));
        point.b += &g * g.transpose();
        let lambda = DMatrix::from_fn(inc.n(), inc.m(), |i, j| {
            if inc.is_on(i, j) {
                0.0
            } else {
                rng.random_range(0.0..4.0)
            }
        });
        let mut cert = DualCertificate {
            u: DVector::zeros(inc.n()),
            w: DVector::from_fn(inc.zero_count(), |_, _| rng.random_range(-3.0..3.0)),
            weights: WeightMatrix::new(&inc, lambda).unwrap(),
        };
        let m = dual_matrix(&cert, &inc).unwrap();
        let floor = numerics::max_eigenvalue(&(&m * m.transpose())).unwrap() / 4.0 - 1.0;
        cert.u = DVector::from_fn(inc.n(), |_, _| floor + rng.random_range(0.0..2.0));
        match duality_gap(&point, &cert, &inc) {
            Ok(gap) if gap >= -1e-7 => {}
            other => failures.push(format!("weak duality pair {pairs}: {other:?}")),
        }
        pairs += 1;
    }
}

fn projection_properties(failures: &mut Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for trial in 0..100 {
        let size = 2 + trial % 12;
        let sym = |rng: &mut ChaCha8Rng| {
            let e = DMatrix::from_fn(size, size, |_, _| rng.random_range(-2.0..2.0));
            (&e + e.transpose()) * 0.5
        };
        let (x, y) = (sym(&mut rng), sym(&mut rng));
        let (px, py) = (psd_project(&x).unwrap(), psd_project(&y).unwrap());
        let again = psd_project(&px).unwrap();
        if (&again - &px).norm() > 1e-10 * (1.0 + px.norm()) {
            failures.push(format!("psd_project not idempotent on trial {trial}"));
        }
        if (&px - &py).norm() > (&x - &y).norm() + 1e-10 {
            failures.push(format!("psd_project expands distances on trial {trial}"));
        }
    }
}

fn inscription_properties(failures: &mut Vec<String>) {
    let mut round_trips = 0;
    let mut normalized = 0;
    let mut seed = 700;
    while round_trips < 20 || normalized < 20 {
        seed += 1;
        let (n, d) = [(6, 3), (7, 4), (8, 5), (10, 5)][seed as usize % 4];
        let (v, inc) = random_inscribed(n, d, seed).unwrap();
        if normalized < 20 {
            normalized += 1;
            match normalize_inscription(&v).and_then(|w| facet_enumeration(&w)) {
                Ok(after) if after == inc => {}
                other => failures.push(format!("seed {seed}: normalization changed the incidence ({:?})", other.err())),
            }
        }
        if round_trips < 20 {
            let Some(insc) = random_inscription(n, d, seed) else { continue };
            round_trips += 1;
            let x = GramBorderMatrix::from_inscription(&insc);
            match extract_vertices(&x, d, 1e-9) {
                Ok(w) => {
                    let err = (w.gram() - insc.polytope.gram()).amax();
                    if err > 1e-8 {
                        failures.push(format!("seed {seed}: round-trip Gram error {err:e}"));
                    }
                }
                Err(e) => failures.push(format!("seed {seed}: extraction failed: {e}")),
            }
        }
    }
}

fn projection_fixed_points(failures: &mut Vec<String>) {
    let opts = PipelineOptions::default();
    for spec in family_specs() {
        let f = build_family(spec).unwrap();
        let x = GramBorderMatrix::from_inscription(&f.inscription);
        let inc = &f.inscription.incidence;
        let d = f.inscription.polytope.dim();
        for report in [alternating_projection(&x, inc, d, &opts), simplified_ap(&x, inc, d, &opts)] {
            let r = report.unwrap();
            let e = r.final_gap.unwrap_or(f64::INFINITY);
            if r.iterations != 1 || e > opts.eps_stop || !r.inscribed {
                failures.push(format!("{} {}: {} iterations, E = {e:e}", label(&spec), r.method, r.iterations));
            }
        }
    }
}

fn property_suites() -> Verdict {
    let mut failures = Vec::new();
    weak_duality(&mut failures);
    projection_properties(&mut failures);
    inscription_properties(&mut failures);
    projection_fixed_points(&mut failures);
    verdict(
        failures,
        "200 duality pairs, 100 projections, 20 round trips, 20 normalizations, 50 fixed points".into(),
    )
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let wanted = |k: usize| only.as_ref().is_none_or(|o| o.contains(&k));

    let mut all_pass = true;
    let mut report = |k: usize, name: &str, run: &dyn Fn() -> Verdict| {
        if !wanted(k) {
            return;
        }
        let start = Instant::now();
        let v = run();
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!("{status} criterion {k} ({name}): {} [{:.1}s]", v.detail, start.elapsed().as_secs_f64());
        all_pass &= v.pass;
    };
    report(1, "family certificates", &family_certificates);
    report(2, "eigenvalue oracles", &eigenvalue_oracles);
    report(3, "SDP rank recovery", &sdp_rank_recovery);
    let start = Instant::now();
    let runs = (wanted(4) || wanted(5)).then(n8d5_runs);
    let run_time = start.elapsed().as_secs_f64();
    if let Some(runs) = &runs {
        report(4, "n=8 d=5 reproduction", &|| {
            let mut v = n8d5_reproduction(runs);
            v.detail += &format!(" (method runs {run_time:.0}s)");
            v
        });
        report(5, "dominance", &|| dominance(runs));
    }
    report(6, "count formulas", &count_formulas);
    report(7, "property suites", &property_suites);
    if !all_pass {
        std::process::exit(1);
    }
}
