mod common;

use bvpkit::characteristic::realize;
use bvpkit::grid::{sobolev_norm, sobolev_norm_to};
use bvpkit::prelude::*;
use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `y_j(t) = amp_j sin(w_j t + ph_j)` with exact derivatives.
fn trig_stack(grid: Grid, top: usize, waves: &[(f64, f64, f64)]) -> DerivativeStack {
    DerivativeStack::from_fn(grid, top, |k, t| {
        CVector::from_iterator(
            waves.len(),
            waves.iter().map(|&(amp, w, ph)| c(amp * w.powi(k as i32) * (w * t + ph + k as f64 * std::f64::consts::FRAC_PI_2).sin())),
        )
    })
    .unwrap()
}

fn wave() -> impl Strategy<Value = (f64, f64, f64)> {
    (-2.0..2.0f64, 0.1..4.0f64, 0.0..6.3f64)
}

fn exponent() -> impl Strategy<Value = LebesgueExponent> {
    prop_oneof![Just(LebesgueExponent::infinity()), (1.0..6.0f64).prop_map(|p| LebesgueExponent::new(p).unwrap())]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sobolev_norm_is_a_norm(u in prop::collection::vec(wave(), 2), v in prop::collection::vec(wave(), 2), s in -3.0..3.0f64, p in exponent()) {
        let grid = Grid::uniform(unit(), 101).unwrap();
        let y = trig_stack(grid, 2, &u);
        let z = trig_stack(grid, 2, &v);
        let sum = y.add_scaled(c(1.0), &z).unwrap();
        let (ny, nz) = (sobolev_norm(&y, p), sobolev_norm(&z, p));
        prop_assert!(sobolev_norm(&sum, p) <= ny + nz + 1e-12);
        prop_assert!((sobolev_norm(&y.scale(c(s)), p) - s.abs() * ny).abs() <= 1e-12 * (1.0 + ny));
        prop_assert!(sobolev_norm_to(&y, 0, p) <= sobolev_norm_to(&y, 1, p));
        prop_assert!(sobolev_norm_to(&y, 1, p) <= sobolev_norm_to(&y, 2, p));
    }

    #[test]
    fn boundary_operator_is_linear(u in prop::collection::vec(wave(), 2), v in prop::collection::vec(wave(), 2), s in -3.0..3.0f64, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = Grid::uniform(unit(), 201).unwrap();
        let b = BoundaryOperator::new(3, vec![
            PointTerm::new(0.37, 0, random_matrix(&mut rng, 3, 2, 1.0)),
            PointTerm::new(1.0, 1, random_matrix(&mut rng, 3, 2, 1.0)),
        ], Some(IntegralTerm::new(MatrixFunction::Constant(random_matrix(&mut rng, 3, 2, 1.0)))));
        let y = trig_stack(grid, 2, &u);
        let z = trig_stack(grid, 2, &v);
        let lhs = b.apply(&y.add_scaled(c(s), &z).unwrap()).unwrap();
        let rhs = b.apply(&y).unwrap() + b.apply(&z).unwrap() * c(s);
        prop_assert!((lhs - rhs).iter().all(|d| d.norm() < 1e-12));
    }

    #[test]
    fn index_identities(seed in any::<u64>(), r in 1usize..=2, m in 1usize..=3, shift in 0usize..3, capped in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = (r * m + shift).saturating_sub(1).max(1);
        let spec = random_problem(&mut rng, r, m, q, capped.then_some(1));
        let cm = build_characteristic_matrix(&spec, &Grid::uniform(unit(), 101).unwrap(), &RankPolicy::default()).unwrap();
        let rep = solvability_report(&cm, &spec);
        prop_assert_eq!(rep.index, (r * m) as i64 - q as i64);
        prop_assert_eq!(rep.dim_ker as i64 - rep.dim_coker as i64, rep.index);
        prop_assert_eq!(rep.dim_ker, r * m - rep.numerical_rank);
        prop_assert_eq!(kernel_directions(&cm).len(), rep.dim_ker);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn superposition(seed in any::<u64>(), s in -2.0..2.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = random_problem(&mut rng, 2, 2, 4, None);
        let grid = Grid::uniform(unit(), 201).unwrap();
        let rhs = |rng: &mut ChaCha8Rng| RightHandSide::new(
            MatrixFunction::Polynomial(vec![random_matrix(rng, 2, 1, 1.0), random_matrix(rng, 2, 1, 1.0)]),
            CVector::from_iterator(4, random_matrix(rng, 4, 1, 1.0).iter().copied()),
        );
        let (r1, r2) = (rhs(&mut rng), rhs(&mut rng));
        let MatrixFunction::Polynomial(p1) = &r1.f else { unreachable!() };
        let MatrixFunction::Polynomial(p2) = &r2.f else { unreachable!() };
        let combined = RightHandSide::new(
            MatrixFunction::Polynomial(p1.iter().zip(p2).map(|(a, b)| a + b * c(s)).collect()),
            &r1.c + &r2.c * c(s),
        );
        let policy = RankPolicy::default();
        let solve_with = |r: RightHandSide| solve(&spec.clone().with_rhs(r).unwrap(), &grid, &policy);
        let (Ok(y1), Ok(y2), Ok(y)) = (solve_with(r1), solve_with(r2), solve_with(combined)) else {
            // a random draw may be ill posed; nothing to compare
            return Ok(());
        };
        let expect = y1.stack.add_scaled(c(s), &y2.stack).unwrap();
        let scale = 1.0 + sobolev_norm(&y.stack, spec.p());
        prop_assert!(sobolev_norm(&y.stack.sub(&expect).unwrap(), spec.p()) < 1e-8 * scale);
    }

    #[test]
    fn kernel_directions_solve_the_homogeneous_problem(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = random_problem(&mut rng, 2, 2, 4, Some(2));
        let cm = build_characteristic_matrix(&spec, &Grid::uniform(unit(), 401).unwrap(), &RankPolicy::default()).unwrap();
        let dirs = kernel_directions(&cm);
        prop_assert_eq!(dirs.len(), 2);
        for xi in &dirs {
            let y = realize(&cm, xi).unwrap();
            prop_assert!(bvpkit::ode::equation_defect(spec.coeffs(), &y, None).unwrap() < 1e-8);
            prop_assert!(bvpkit::vector_norm(&spec.boundary().apply(&y).unwrap()) < 1e-10);
        }
    }
}
