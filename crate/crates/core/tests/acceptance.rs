//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use bvpkit::closed_forms::{cos_sqrt, matrix_exp, oracle_characteristic, phi, sinc_sqrt, ExampleProblem, OracleForm};
use bvpkit::limits::{check_multipoint_assumptions, convergence_experiment, semicontinuity_check, ExperimentConfig, ProblemFamily, DEFAULT_SCHEDULE};
use bvpkit::ode::equation_defect;
use bvpkit::prelude::*;
use bvpkit::characteristic::realize;
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);
type Check = fn() -> Outcome;

fn ac1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for m in [2, 3] {
        let a = random_with_norm(&mut rng, m, 1.8);
        let alpha: Vec<CMatrix> = (0..3).map(|_| random_matrix(&mut rng, m, m, 1.0)).collect();
        let spec = example_one(&a, &alpha, unit());
        let cm = build_characteristic_matrix(&spec, &Grid::uniform(unit(), 2001).unwrap(), &RankPolicy::default()).unwrap();
        let want = oracle_characteristic(&ExampleProblem::One { a, alpha }, OracleForm::Derived).unwrap();
        worst = worst.max(relative_deviation(cm.entries(), &want));
    }
    let secs = start.elapsed().as_secs_f64();
    (worst < 1e-6 && secs < 5.0, format!("max relative deviation {worst:.2e} (2x2, 3x3), {secs:.2} s at 2001 nodes"))
}

fn ac2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let (m, q, n) = (2, 2, 2);
        let mut terms = Vec::new();
        for _ in 0..3 {
            terms.push((rng.gen_range(0.0..1.0), 0, random_matrix(&mut rng, q, m, 1.0)));
        }
        for d in 1..=n {
            terms.push((rng.gen_range(0.0..1.0), d, random_matrix(&mut rng, q, m, 5.0)));
        }
        let spec = derivative_only(m, n, q, terms.clone(), None);
        let cm = build_characteristic_matrix(&spec, &Grid::uniform(unit(), 301).unwrap(), &RankPolicy::default()).unwrap();
        let want = oracle_characteristic(&ExampleProblem::Two { terms: terms.into_iter().map(|(_, d, a)| (d, a)).collect() }, OracleForm::Derived).unwrap();
        worst = worst.max(relative_deviation(cm.entries(), &want));
    }
    (worst < 1e-10, format!("max relative deviation {worst:.2e} over 5 random point sets"))
}

fn numeric_matrix(spec: &ProblemSpec, nodes: usize) -> CMatrix {
    let grid = Grid::uniform(spec.interval(), nodes).unwrap();
    build_characteristic_matrix(spec, &grid, &RankPolicy::default()).unwrap().entries().clone()
}

fn ac3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = random_with_norm(&mut rng, 2, 1.5);
    let alpha: Vec<CMatrix> = (0..3).map(|_| random_matrix(&mut rng, 4, 2, 1.0)).collect();
    let beta: Vec<CMatrix> = (0..3).map(|_| random_matrix(&mut rng, 4, 2, 1.0)).collect();
    let zeros = vec![CMatrix::zeros(4, 2); 3];
    let mut worst: f64 = 0.0;
    let mut four = Vec::new();
    let mut one_point = Vec::new();
    for length in [1.0, 2.5] {
        let interval = Interval::new(0.0, length).unwrap();
        let s3 = two_point_second_order(&a, &alpha, &beta, interval, true);
        let o3 = oracle_characteristic(&ExampleProblem::Three { a: a.clone(), alpha: alpha.clone(), beta: beta.clone(), length }, OracleForm::Derived).unwrap();
        worst = worst.max(relative_deviation(&numeric_matrix(&s3, 2001), &o3));
        let s4 = two_point_second_order(&a, &alpha, &beta, interval, false);
        let o4 = oracle_characteristic(&ExampleProblem::Four { a: a.clone(), alpha: alpha.clone(), beta: beta.clone(), length }, OracleForm::Derived).unwrap();
        let n4 = numeric_matrix(&s4, 2001);
        worst = worst.max(relative_deviation(&n4, &o4));
        four.push(n4);
        one_point.push(numeric_matrix(&two_point_second_order(&a, &alpha, &zeros, interval, true), 2001));
    }
    let four_change = relative_deviation(&four[0], &four[1]);
    let three_change = relative_deviation(&one_point[0], &one_point[1]);
    (
        worst < 1e-6 && four_change > 1e-3 && three_change < 1e-10,
        format!("max relative deviation {worst:.2e}; example 4 change with length {four_change:.2e}; one-point example 3 change {three_change:.2e}"),
    )
}

fn random_corpus(count: usize) -> Vec<ProblemSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    (0..count)
        .map(|_| {
            let r = rng.gen_range(1..=2);
            let m = rng.gen_range(1..=3);
            let rm = r * m;
            let q = (rm - 1 + rng.gen_range(0..3)).max(1);
            let cap = if rng.gen_bool(0.4) { Some(rng.gen_range(1..=q)) } else { None };
            random_problem(&mut rng, r, m, q, cap)
        })
        .collect()
}

fn ac4() -> Outcome {
    let corpus = random_corpus(60);
    let grid = Grid::uniform(unit(), 201).unwrap();
    let mut bad = 0;
    let mut deficient = 0;
    for spec in &corpus {
        let cm = build_characteristic_matrix(spec, &grid, &RankPolicy::default()).unwrap();
        let rep = solvability_report(&cm, spec);
        let rm = (spec.r() * spec.m()) as i64;
        if rep.index != rm - spec.q() as i64 || rep.dim_ker as i64 - rep.dim_coker as i64 != rep.index {
            bad += 1;
        }
        if rep.numerical_rank < spec.q().min(spec.r() * spec.m()) {
            deficient += 1;
        }
    }
    (bad == 0, format!("{} problems, {bad} identity violations, {deficient} rank-deficient", corpus.len()))
}

fn ac5() -> Outcome {
    let corpus = random_corpus(60);
    let grid = Grid::uniform(unit(), 401).unwrap();
    let (mut directions, mut worst_l, mut worst_b, mut count_bad) = (0, 0.0f64, 0.0f64, 0);
    for spec in &corpus {
        let cm = build_characteristic_matrix(spec, &grid, &RankPolicy::default()).unwrap();
        let dirs = kernel_directions(&cm);
        if dirs.len() != spec.r() * spec.m() - cm.numerical_rank() {
            count_bad += 1;
        }
        for xi in &dirs {
            let y = realize(&cm, xi).unwrap();
            worst_l = worst_l.max(equation_defect(spec.coeffs(), &y, None).unwrap());
            worst_b = worst_b.max(bvpkit::vector_norm(&spec.boundary().apply(&y).unwrap()));
            directions += 1;
        }
    }
    (
        count_bad == 0 && directions > 0 && worst_l < 1e-6 && worst_b < 1e-6,
        format!("{directions} directions, max |Ly| {worst_l:.2e}, max |By| {worst_b:.2e}, {count_bad} count mismatches"),
    )
}

fn ac6() -> Outcome {
    let one = CMatrix::from_element(1, 1, c(1.0));
    let coeffs = CoefficientSet::new(1, 0, vec![MatrixFunction::Constant(one.clone())]).unwrap();
    let b = BoundaryOperator::new(1, vec![PointTerm::new(0.0, 0, one.clone())], None);
    let rhs = RightHandSide::new(MatrixFunction::Constant(one.clone()), CVector::zeros(1));
    let spec = ProblemSpec::new(unit(), coeffs, b, LebesgueExponent::new(2.0).unwrap(), Some(rhs)).unwrap();
    let grid = Grid::uniform(unit(), 1001).unwrap();
    let sol = solve(&spec, &grid, &RankPolicy::default()).unwrap();
    let e1 = (0..grid.len()).map(|i| (sol.stack.at(0, i)[0] - c(1.0 - (-grid.node(i)).exp())).norm()).fold(0.0, f64::max);

    let coeffs = CoefficientSet::new(1, 0, vec![MatrixFunction::zeros(1, 1), MatrixFunction::zeros(1, 1)]).unwrap();
    let e = |i: usize| CMatrix::from_fn(2, 1, |k, _| if k == i { c(1.0) } else { c(0.0) });
    let b = BoundaryOperator::new(2, vec![PointTerm::new(0.0, 0, e(0)), PointTerm::new(1.0, 0, e(1))], None);
    let rhs = RightHandSide::new(MatrixFunction::zeros(1, 1), CVector::from_vec(vec![c(0.0), c(1.0)]));
    let spec = ProblemSpec::new(unit(), coeffs, b, LebesgueExponent::new(2.0).unwrap(), Some(rhs)).unwrap();
    let sol = solve(&spec, &grid, &RankPolicy::default()).unwrap();
    let e2 = (0..grid.len()).map(|i| (sol.stack.at(0, i)[0] - c(grid.node(i))).norm()).fold(0.0, f64::max);
    (e1 <= 1e-8 && e2 <= 1e-10, format!("y' + y = 1 max node error {e1:.2e}; y'' = 0 max node error {e2:.2e}"))
}

fn slope(eps: &[f64], err: &[f64]) -> f64 {
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = err.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn perturbed_family() -> ProblemFamily {
    ProblemFamily::new(perturbed_dirichlet(0.0).unwrap(), DEFAULT_SCHEDULE.to_vec(), perturbed_dirichlet).unwrap()
}

fn ac7() -> Outcome {
    let rep = convergence_experiment(&perturbed_family(), &ExperimentConfig::default()).unwrap();
    let errors: Option<Vec<f64>> = rep.solution_errors().into_iter().collect();
    let Some(errors) = errors else {
        return (false, "some scheduled problems were not solved".into());
    };
    let s = slope(&rep.schedule, &errors);
    let Some([lo, hi]) = rep.ratio_bracket else {
        return (false, format!("slope {s:.3}, ratio bracket undefined"));
    };
    (
        (s - 1.0).abs() <= 0.15 && hi / lo < 1e3 && rep.verdict("solution") == Some(true),
        format!("log-log slope {s:.3}; ratio bracket [{lo:.3e}, {hi:.3e}], max/min {:.3}", hi / lo),
    )
}

fn ac8() -> Outcome {
    let (coeffs, f) = splitting_equation();
    let cfg = ExperimentConfig { nodes: 801, ..Default::default() };
    let p2 = LebesgueExponent::new(2.0).unwrap();
    let good = splitting_family(false);
    let inf_rep = check_multipoint_assumptions(&good, LebesgueExponent::infinity(), &DEFAULT_SCHEDULE).unwrap();
    let p2_rep = check_multipoint_assumptions(&good, p2, &DEFAULT_SCHEDULE).unwrap();
    let pf = good.problem_family(unit(), coeffs.clone(), p2, f.clone(), DEFAULT_SCHEDULE.to_vec()).unwrap();
    let good_solution = convergence_experiment(&pf, &cfg).unwrap().verdict("solution") == Some(true);

    let bad = splitting_family(true);
    let bad_rep = check_multipoint_assumptions(&bad, p2, &DEFAULT_SCHEDULE).unwrap();
    let delta_fails = !bad_rep.row("delta").unwrap().pass;
    let pf = bad.problem_family(unit(), coeffs, p2, f, DEFAULT_SCHEDULE.to_vec()).unwrap();
    let bad_solution = convergence_experiment(&pf, &cfg).unwrap().verdict("solution") == Some(true);
    (
        inf_rep.pass && p2_rep.pass && good_solution && delta_fails && !bad_solution,
        format!(
            "splitting: assumptions p=inf {}, p=2 {}, solution {}; zero series: delta {}, solution {}",
            word(inf_rep.pass),
            word(p2_rep.pass),
            word(good_solution),
            word(!delta_fails),
            word(bad_solution)
        ),
    )
}

fn word(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "fail"
    }
}

fn ac9() -> Outcome {
    let coeffs = CoefficientSet::new(2, 0, vec![MatrixFunction::zeros(2, 2)]).unwrap();
    let spec = move |e: f64| {
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0), c(e)]));
        let b = BoundaryOperator::new(2, vec![PointTerm::new(0.0, 0, d)], None);
        ProblemSpec::new(unit(), coeffs.clone(), b, LebesgueExponent::new(2.0).unwrap(), None)
    };
    let fam = ProblemFamily::new(spec(0.0).unwrap(), DEFAULT_SCHEDULE.to_vec(), spec).unwrap();
    let cfg = ExperimentConfig { nodes: 201, ..Default::default() };
    let semi = semicontinuity_check(&fam, &cfg).unwrap();
    let holds = semi.rows.iter().all(|r| r.dim_ker <= semi.dim_ker_0 && r.dim_coker <= semi.dim_coker_0);
    let full = semi.rows.iter().all(|r| r.dim_ker == 0 && r.dim_coker == 0);

    let rep = convergence_experiment(&perturbed_family(), &ExperimentConfig::default()).unwrap();
    let invertible = rep.verdict("condition-I") == Some(true)
        && rep.verdict("condition-II") == Some(true)
        && rep.rows.iter().all(|r| r.well_posed);
    (
        semi.dim_ker_0 == 1 && semi.dim_coker_0 == 1 && holds && full && invertible,
        format!(
            "dim ker/coker at 0: {}/{}; scheduled {:?}; invertible limit keeps every scheduled problem well posed: {}",
            semi.dim_ker_0,
            semi.dim_coker_0,
            semi.rows.iter().map(|r| (r.dim_ker, r.dim_coker)).collect::<Vec<_>>(),
            invertible
        ),
    )
}

fn ac10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let a = random_with_norm(&mut rng, 3, 4.0);
    let exact = matrix_exp(&(-&a), 1.0).unwrap().value;
    let coeffs = CoefficientSet::new(3, 0, vec![MatrixFunction::Constant(a.clone())]).unwrap();
    let errors: Vec<f64> = [11, 21, 41, 81]
        .iter()
        .map(|&nodes| {
            let fs = fundamental_set(&coeffs, &Grid::uniform(unit(), nodes).unwrap()).unwrap();
            let y = fs.members()[0].at(0, nodes - 1);
            y.iter().zip(exact.iter()).map(|(x, e)| (x - e).norm()).fold(0.0, f64::max)
        })
        .collect();
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
    let order_ok = ratios.iter().all(|r| (r - 16.0).abs() <= 4.0);

    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let n = rng.gen_range(2..=4);
        let v = CMatrix::identity(n, n) + random_matrix(&mut rng, n, n, 0.3);
        let d: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
        let a = via_eigen(&v, &d, |x| x);
        let s = 0.8;
        let checks = [
            (matrix_exp(&a, s).unwrap().value, via_eigen(&v, &d, |x| (x * s).exp())),
            (phi(&a, s).unwrap().value, via_eigen(&v, &d, |x| if x.norm() < 1e-12 { c(s) } else { (c(1.0) - (-x * s).exp()) / x })),
            (cos_sqrt(&a, s).unwrap().value, via_eigen(&v, &d, |x| (x.sqrt() * s).cos())),
            (sinc_sqrt(&a, s).unwrap().value, via_eigen(&v, &d, |x| (x.sqrt() * s).sin() / x.sqrt())),
        ];
        for (got, want) in &checks {
            worst = worst.max(relative_deviation(got, want));
        }
    }
    (
        order_ok && worst < 1e-8,
        format!("RK4 error ratios per halving {:?}; series vs eigendecomposition {worst:.2e}", ratios.iter().map(|r| (r * 100.0).round() / 100.0).collect::<Vec<_>>()),
    )
}

fn main() {
    let criteria: [(&str, Check); 10] =
        [("AC1", ac1), ("AC2", ac2), ("AC3", ac3), ("AC4", ac4), ("AC5", ac5), ("AC6", ac6), ("AC7", ac7), ("AC8", ac8), ("AC9", ac9), ("AC10", ac10)];
    let mut failed = 0;
    for (name, check) in criteria {
        let (pass, detail) = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default();
            (false, format!("panicked: {msg}"))
        });
        println!("{name} {}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
