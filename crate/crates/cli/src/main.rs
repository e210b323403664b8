use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

use inscribe::bench::{self, DetailRow, Instance};
use inscribe::families::{build_family, family_lambda_max_numeric, FamilyKind, FamilySpec};
use inscribe::io::{parse_polytope, write_polytope};
use inscribe::numerics::numeric_rank;
use inscribe::pipeline::{run_procedure, Method, PipelineOptions};
use inscribe::polytope::{random_inscribed, zero_pattern, EPS_ZERO};
use inscribe::sdp::{
    dual_feasibility_margin, duality_gap, solve_sdp, PrimalPoint, SdpInstance, SolverOptions, WeightMatrix,
};

const EXIT_INSCRIBED: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_UNDETERMINED: u8 = 2;

#[derive(Parser)]
#[command(name = "inscribe", version, about = "Search for inscribed realizations of polytopes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the inscription procedure on a polytope JSON file.
    Check {
        input: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Write seeded random inscribed polytopes as `<n>_<d>_<index>.json`.
    Gen {
        n: usize,
        d: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Print the closed-form certificate of a polytope family.
    Family {
        /// ngon, simplex, cube or cross-polytope.
        kind: String,
        /// Number of vertices for ngon, dimension otherwise.
        param: usize,
        /// Also solve the SDP with the certified weight and report its rank.
        #[arg(long)]
        solve: bool,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Run methods on seeded instance sets and write summary and detail CSVs.
    Bench {
        /// Instance set as `n,d,count,seed`; repeatable.
        #[arg(long = "set", required = true, value_parser = parse_set)]
        sets: Vec<(usize, usize, usize, u64)>,
        /// Comma-separated method labels, e.g. `SDP-λh,AP-λ*`.
        #[arg(long, value_delimiter = ',')]
        methods: Vec<String>,
        /// Summary CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Per-instance CSV path; defaults to the summary path with a
        /// `.detail.csv` suffix.
        #[arg(long)]
        detail: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverFlags,
    },
}

#[derive(Args, Clone)]
struct SolverFlags {
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, default_value_t = SolverOptions::default().tol)]
    sdp_tol: f64,
    #[arg(long, default_value_t = 50_000)]
    sdp_max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    rank_tol: f64,
    #[arg(long, default_value_t = EPS_ZERO)]
    eps_zero: f64,
    #[arg(long, default_value_t = 5000)]
    ap_max_iter: usize,
}

impl SolverFlags {
    fn options(&self) -> Result<PipelineOptions, String> {
        for (name, v) in [
            ("--rho", self.rho),
            ("--sdp-tol", self.sdp_tol),
            ("--rank-tol", self.rank_tol),
            ("--eps-zero", self.eps_zero),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("{name} must be a positive number, got {v}"));
            }
        }
        Ok(PipelineOptions {
            sdp: SolverOptions {
                rho: self.rho,
                tol: self.sdp_tol,
                max_iter: self.sdp_max_iter,
                ..SolverOptions::default()
            },
            rank_tol: self.rank_tol,
            ap_max_iter: self.ap_max_iter,
            ..PipelineOptions::default()
        })
    }
}

fn parse_set(s: &str) -> Result<(usize, usize, usize, u64), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [n, d, count, seed] = parts[..] else {
        return Err(format!("expected n,d,count,seed, got `{s}`"));
    };
    let int = |v: &str| v.parse::<usize>().map_err(|e| format!("`{v}`: {e}"));
    Ok((int(n)?, int(d)?, int(count)?, seed.parse().map_err(|e| format!("`{seed}`: {e}"))?))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_INSCRIBED };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Check { input, solver } => cmd_check(&input, &solver),
        Command::Gen {
            n,
            d,
            count,
            seed,
            out,
        } => cmd_gen(n, d, count, seed, &out),
        Command::Family {
            kind,
            param,
            solve,
            solver,
        } => cmd_family(&kind, param, solve, &solver),
        Command::Bench {
            sets,
            methods,
            out,
            detail,
            solver,
        } => cmd_bench(&sets, &methods, &out, detail.as_deref(), &solver),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn cmd_check(input: &Path, flags: &SolverFlags) -> Result<u8, String> {
    let opts = flags.options()?;
    let text = std::fs::read_to_string(input).map_err(|e| format!("{}: {e}", input.display()))?;
    let (v, incidence) = parse_polytope(&text).map_err(|e| format!("{}: {e}", input.display()))?;
    let report = run_procedure(&incidence, v.dim(), &opts).map_err(|e| e.to_string())?;
    println!("{}", serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?);
    Ok(if report.inscribed {
        EXIT_INSCRIBED
    } else {
        EXIT_UNDETERMINED
    })
}

fn cmd_gen(n: usize, d: usize, count: usize, seed: u64, out: &Path) -> Result<u8, String> {
    if n < d + 1 {
        return Err(format!("n = {n} must be at least d + 1 = {}", d + 1));
    }
    std::fs::create_dir_all(out).map_err(|e| format!("{}: {e}", out.display()))?;
    for index in 0..count {
        let file_seed = seed.wrapping_add(index as u64);
        let (v, incidence) =
            random_inscribed(n, d, file_seed).map_err(|e| format!("file {index} (seed {file_seed}): {e}"))?;
        let path = out.join(format!("{n}_{d}_{index}.json"));
        std::fs::write(&path, write_polytope(&v, Some(&incidence)))
            .map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(EXIT_INSCRIBED)
}

fn cmd_family(kind: &str, param: usize, solve: bool, flags: &SolverFlags) -> Result<u8, String> {
    let opts = flags.options()?;
    let kind = FamilyKind::parse(kind).ok_or_else(|| format!("unknown family `{kind}`"))?;
    let spec = FamilySpec::new(kind, param).map_err(|e| e.to_string())?;
    let family = build_family(spec).map_err(|e| e.to_string())?;
    let insc = &family.inscription;
    let incidence = &insc.incidence;
    let cert = family.certificate().map_err(|e| e.to_string())?;
    let margin = dual_feasibility_margin(&cert, incidence).map_err(|e| e.to_string())?;
    let gap = duality_gap(&PrimalPoint::from_inscription(insc), &cert, incidence).map_err(|e| e.to_string())?;
    let numeric = family_lambda_max_numeric(&family).map_err(|e| e.to_string())?;
    let mut out = json!({
        "family": kind.name(),
        "param": param,
        "n": incidence.n(),
        "m": incidence.m(),
        "d": insc.polytope.dim(),
        "lambda_bar": family.lambda_bar,
        "u_bar": family.u_bar,
        "w_bar": family.w_bar,
        "lambda_max_closed_form": family.lambda_max_closed_form,
        "lambda_max_numeric": numeric,
        "h_norm_sq": family.h_norm_sq,
        "duality_gap": gap,
        "feasibility_margin": margin,
    });
    let mut code = EXIT_INSCRIBED;
    if solve {
        let d = insc.polytope.dim();
        let weights = WeightMatrix::uniform(incidence, family.lambda_bar).map_err(|e| e.to_string())?;
        let inst = SdpInstance::new(incidence.clone(), weights, d).map_err(|e| e.to_string())?;
        let sol = solve_sdp(&inst, &opts.sdp).map_err(|e| e.to_string())?;
        let rank = numeric_rank(sol.x.data(), opts.rank_tol).map_err(|e| e.to_string())?;
        let support_matches = zero_pattern(&sol.x.s_block(), flags.eps_zero, d)
            .map(|z| z == *incidence)
            .unwrap_or(false);
        if !(sol.converged && rank == d + 1) {
            code = EXIT_UNDETERMINED;
        }
        out["solve"] = json!({
            "converged": sol.converged,
            "iterations": sol.iterations,
            "objective": sol.objective,
            "rank": rank,
            "support_matches": support_matches,
        });
    }
    println!("{}", serde_json::to_string_pretty(&out).map_err(|e| e.to_string())?);
    Ok(code)
}

fn cmd_bench(
    sets: &[(usize, usize, usize, u64)],
    labels: &[String],
    out: &Path,
    detail: Option<&Path>,
    flags: &SolverFlags,
) -> Result<u8, String> {
    let opts = flags.options()?;
    let labels: Vec<&String> = labels.iter().filter(|l| !l.trim().is_empty()).collect();
    if labels.is_empty() {
        return Err("no methods given".into());
    }
    let methods = labels
        .iter()
        .map(|l| Method::parse(l).ok_or_else(|| format!("unknown method `{l}`")))
        .collect::<Result<Vec<_>, _>>()?;

    let mut instances: Vec<Instance> = Vec::new();
    for &(n, d, count, seed) in sets {
        if n < d + 1 {
            return Err(format!("set {n},{d}: n must be at least d + 1"));
        }
        instances.extend(bench::generate_instances(n, d, count, seed).map_err(|e| e.to_string())?);
    }
    let jobs: Vec<(Method, &Instance)> = methods
        .iter()
        .flat_map(|&m| instances.iter().map(move |inst| (m, inst)))
        .collect();

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(threads) = std::env::var("INSCRIBE_THREADS").ok().and_then(|t| t.parse().ok()) {
        pool = pool.num_threads(threads);
    }
    let pool = pool.build().map_err(|e| e.to_string())?;
    let details: Vec<DetailRow> =
        pool.install(|| jobs.par_iter().map(|&(m, inst)| bench::run_instance(m, inst, &opts)).collect());

    let summary = bench::summarize(&details);
    std::fs::write(out, bench::summary_csv(&summary)).map_err(|e| format!("{}: {e}", out.display()))?;
    let detail_path = detail.map(Path::to_path_buf).unwrap_or_else(|| {
        let mut p = out.as_os_str().to_owned();
        p.push(".detail.csv");
        PathBuf::from(p)
    });
    std::fs::write(&detail_path, bench::detail_csv(&details))
        .map_err(|e| format!("{}: {e}", detail_path.display()))?;
    Ok(EXIT_INSCRIBED)
}
