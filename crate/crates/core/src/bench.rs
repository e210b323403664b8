//! Benchmark harness: seeded instance sets, per-instance method runs and
//! the summary/detail CSV tables.

use std::fmt::Write as _;

use crate::error::Result;
use crate::pipeline::{prepare_inscription, run_method, Method, PipelineOptions};
use crate::polytope::{random_inscribed, FacetIncidence, PolytopeVRep};

pub const SUMMARY_HEADER: &str = "method,n,d,solved,total,avg_time_s,max_time_s";
pub const DETAIL_HEADER: &str = "method,n,d,index,seed,solved,iterations,time_s,error";

/// A generated inscribed polytope; `seed` is the set seed plus `index`.
#[derive(Debug, Clone)]
pub struct Instance {
    pub n: usize,
    pub d: usize,
    pub index: usize,
    pub seed: u64,
    pub vertices: PolytopeVRep,
    pub incidence: FacetIncidence,
}

pub fn generate_instances(n: usize, d: usize, count: usize, seed: u64) -> Result<Vec<Instance>> {
    (0..count)
        .map(|index| {
            let seed = seed.wrapping_add(index as u64);
            let (vertices, incidence) = random_inscribed(n, d, seed)?;
            Ok(Instance {
                n,
                d,
                index,
                seed,
                vertices,
                incidence,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetailRow {
    pub method: Method,
    pub n: usize,
    pub d: usize,
    pub index: usize,
    pub seed: u64,
    pub solved: bool,
    pub iterations: usize,
    pub time_s: f64,
    /// Set when the run failed with an error; such runs count as unsolved.
    pub error: Option<String>,
}

/// Runs one method on one instance. The generated inscription is passed to
/// the duality-gap weights.
pub fn run_instance(method: Method, inst: &Instance, opts: &PipelineOptions) -> DetailRow {
    let start = std::time::Instant::now();
    let outcome = prepare_inscription(&inst.vertices, &inst.incidence)
        .and_then(|known| run_method(method, &inst.incidence, inst.d, Some(&known), opts));
    let time_s = start.elapsed().as_secs_f64();
    let (solved, iterations, error) = match outcome {
        Ok(r) => (r.inscribed, r.iterations, None),
        Err(e) => (false, 0, Some(e.to_string())),
    };
    DetailRow {
        method,
        n: inst.n,
        d: inst.d,
        index: inst.index,
        seed: inst.seed,
        solved,
        iterations,
        time_s,
        error,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: Method,
    pub n: usize,
    pub d: usize,
    pub solved: usize,
    pub total: usize,
    pub avg_time_s: f64,
    pub max_time_s: f64,
}

/// One row per `(method, n, d)`, in order of first appearance.
pub fn summarize(details: &[DetailRow]) -> Vec<BenchRow> {
    let mut rows: Vec<BenchRow> = Vec::new();
    for r in details {
        let row = match rows
            .iter_mut()
            .find(|b| b.method == r.method && b.n == r.n && b.d == r.d)
        {
            Some(row) => row,
            None => {
                rows.push(BenchRow {
                    method: r.method,
                    n: r.n,
                    d: r.d,
                    solved: 0,
                    total: 0,
                    avg_time_s: 0.0,
                    max_time_s: 0.0,
                });
                rows.last_mut().expect("just pushed")
            }
        };
        row.total += 1;
        row.solved += usize::from(r.solved);
        row.avg_time_s += r.time_s;
        row.max_time_s = row.max_time_s.max(r.time_s);
    }
    for row in &mut rows {
        row.avg_time_s /= row.total as f64;
        row.avg_time_s = row.avg_time_s.min(row.max_time_s);
    }
    rows
}

pub fn summary_csv(rows: &[BenchRow]) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{:.6},{:.6}",
            r.method, r.n, r.d, r.solved, r.total, r.avg_time_s, r.max_time_s
        )
        .expect("writing to a String");
    }
    out
}

pub fn detail_csv(rows: &[DetailRow]) -> String {
    let mut out = format!("{DETAIL_HEADER}\n");
    for r in rows {
        let error = r.error.as_deref().unwrap_or("").replace(['"', ',', '\n'], " ");
        writeln!(
            out,
            "{},{},{},{},{},{},{},{:.6},{}",
            r.method,
            r.n,
            r.d,
            r.index,
            r.seed,
            u8::from(r.solved),
            r.iterations,
            r.time_s,
            error
        )
        .expect("writing to a String");
    }
    out
}
