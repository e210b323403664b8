use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use inscribe::bench::{summarize, DetailRow};
use inscribe::numerics::{self, numeric_rank};
use inscribe::pipeline::{run_method, tune_lambda_heuristic, Method, PipelineOptions, Stage, WeightRule, HEURISTIC_ROUNDS};
use inscribe::polytope::{
    count_types, extract_vertices, facet_enumeration, normalize_inscription, random_inscribed, verify_inscription,
    GramBorderMatrix, Inscription, TOL_FIT, TOL_SIDE,
};
use inscribe::sdp::{dual_matrix, duality_gap, DualCertificate, PrimalPoint, WeightMatrix};

const SHAPES: [(usize, usize); 6] = [(4, 2), (5, 3), (6, 3), (7, 4), (8, 5), (9, 6)];

fn instance() -> impl Strategy<Value = (usize, usize, u64)> {
    (0..SHAPES.len(), 0u64..10_000).prop_map(|(k, seed)| (SHAPES[k].0, SHAPES[k].1, seed))
}

fn inscription(n: usize, d: usize, seed: u64) -> Option<Inscription> {
    let (v, inc) = random_inscribed(n, d, seed).unwrap();
    Inscription::fit(normalize_inscription(&v).ok()?, inc).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generated_polytopes_verify_against_their_incidence((n, d, seed) in instance()) {
        let (v, inc) = random_inscribed(n, d, seed).unwrap();
        prop_assert!(v.sphere_deviation() <= 1e-9);
        prop_assert!(verify_inscription(&v, &inc, TOL_FIT, TOL_SIDE).ok);
        prop_assert_eq!(facet_enumeration(&v).unwrap(), inc.clone());
        for j in 0..inc.m() {
            prop_assert_eq!(inc.facet_size(j), d);
        }
    }

    #[test]
    fn normalized_slack_is_nonnegative_with_rank_d_plus_one((n, d, seed) in instance()) {
        if let Some(insc) = inscription(n, d, seed) {
            let slack = insc.slack().unwrap().entries;
            prop_assert!(slack.min() >= 0.0);
            prop_assert_eq!(numeric_rank(&slack, 1e-6).unwrap(), d + 1);
            prop_assert_eq!(facet_enumeration(&insc.polytope).unwrap(), insc.incidence.clone());
        }
    }

    #[test]
    fn extraction_reproduces_the_gram_matrix((n, d, seed) in instance()) {
        if let Some(insc) = inscription(n, d, seed) {
            let x = GramBorderMatrix::from_inscription(&insc);
            let w = extract_vertices(&x, d, 1e-9).unwrap();
            prop_assert!((w.gram() - insc.polytope.gram()).amax() <= 1e-8);
        }
    }

    #[test]
    fn weak_duality_holds(
        (n, d, seed) in instance(),
        scale in 0.0f64..5.0,
        w_scale in 0.0f64..3.0,
        slack_u in 0.0f64..2.0,
    ) {
        if let Some(insc) = inscription(n, d, seed) {
            let inc = &insc.incidence;
            let point = PrimalPoint::from_inscription(&insc);
            let lambda = DMatrix::from_fn(n, inc.m(), |i, j| {
                if inc.is_on(i, j) { 0.0 } else { scale * (1.0 + ((i * 7 + j * 3) % 5) as f64) / 5.0 }
            });
            let mut cert = DualCertificate {
                u: DVector::zeros(n),
                w: DVector::from_fn(inc.zero_count(), |k, _| w_scale * (((k * 5) % 7) as f64 / 3.5 - 1.0)),
                weights: WeightMatrix::new(inc, lambda).unwrap(),
            };
            let m = dual_matrix(&cert, inc).unwrap();
            let floor = numerics::max_eigenvalue(&(&m * m.transpose())).unwrap() / 4.0 - 1.0;
            cert.u = DVector::from_element(n, floor + slack_u);
            prop_assert!(duality_gap(&point, &cert, inc).unwrap() >= -1e-7);
        }
    }

    #[test]
    fn count_types_grows_with_dimension(d in 2usize..30) {
        prop_assert!(count_types(d + 3, d + 1).unwrap() >= count_types(d + 2, d).unwrap());
    }

    #[test]
    fn bench_summaries_are_consistent(
        outcomes in proptest::collection::vec((0usize..3, any::<bool>(), 0.0f64..50.0), 1..40),
    ) {
        let methods = [
            Method::new(Stage::Sdp, WeightRule::Constant),
            Method::new(Stage::Sap, WeightRule::Heuristic),
            Method::new(Stage::Ap, WeightRule::DualityGap),
        ];
        let rows: Vec<DetailRow> = outcomes
            .iter()
            .enumerate()
            .map(|(index, &(k, solved, time_s))| DetailRow {
                method: methods[k],
                n: 8,
                d: 5,
                index,
                seed: index as u64,
                solved,
                iterations: 1,
                time_s,
                error: None,
            })
            .collect();
        let summary = summarize(&rows);
        prop_assert_eq!(summary.iter().map(|r| r.total).sum::<usize>(), rows.len());
        for r in &summary {
            prop_assert!(r.solved <= r.total);
            prop_assert!(r.avg_time_s <= r.max_time_s);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn projections_dominate_the_sdp_start(seed in 0u64..1000, k in 0usize..2) {
        let (n, d) = [(5, 3), (6, 3)][k];
        let (_, inc) = random_inscribed(n, d, seed).unwrap();
        let opts = PipelineOptions { ap_max_iter: 300, ..PipelineOptions::default() };
        for weights in [WeightRule::Constant, WeightRule::Heuristic] {
            let sdp = run_method(Method::new(Stage::Sdp, weights), &inc, d, None, &opts).unwrap();
            for stage in [Stage::Sap, Stage::Ap] {
                let r = run_method(Method::new(stage, weights), &inc, d, None, &opts).unwrap();
                prop_assert!(r.inscribed || !sdp.inscribed);
            }
        }
    }

    #[test]
    fn heuristic_rounds_are_bounded(seed in 0u64..1000) {
        let (_, inc) = random_inscribed(7, 4, seed).unwrap();
        let opts = PipelineOptions::default();
        let r = tune_lambda_heuristic(&inc, 4, &opts).unwrap();
        prop_assert!(!r.bad_facet_history.is_empty());
        prop_assert!(r.bad_facet_history.len() <= HEURISTIC_ROUNDS);
        if let Some(v) = &r.vertices {
            if r.inscribed {
                prop_assert!(v.sphere_deviation() <= 1e-6);
                prop_assert!(verify_inscription(v, &inc, TOL_FIT, TOL_SIDE).ok);
            }
        }
    }
}
