use std::path::Path;

use nalgebra::DVector;
use proptest::prelude::*;

use specradius::abscissa::{abscissa_sweep, AbscissaOptions, RestartPolicy};
use specradius::generators::example_companion;
use specradius::inner::solve_inner_weights;
use specradius::io::{format_delta, format_matrix_market, format_structure, parse_delta, parse_matrix_market, parse_structure};
use specradius::linalg::{rightmost_eigentriple, DEFAULT_TIE_TOL};
use specradius::sampling::{sample_pseudospectrum, sampled_abscissa};
use specradius::{DenseMatrix, Edge, PerturbationStructure};

fn bound() -> impl Strategy<Value = (Option<f64>, Option<f64>)> {
    (
        prop::option::of(-5.0..=0.0f64),
        prop::option::of(0.0..=5.0f64),
    )
}

prop_compose! {
    fn structure()(n in 1usize..6)
        (n in Just(n), cells in prop::collection::btree_set((0..n, 0..n), 1..=(n * n).min(8)),
         bounds in prop::collection::vec(bound(), 8))
        -> PerturbationStructure
    {
        let edges = cells
            .into_iter()
            .zip(bounds)
            .map(|((i, j), (lo, hi))| Edge::bounded(i, j, lo, hi))
            .collect();
        PerturbationStructure::new(n, edges).unwrap()
    }
}

proptest! {
    #[test]
    fn structure_json_round_trip(s in structure()) {
        let text = format_structure(&s);
        prop_assert_eq!(parse_structure(&text, Path::new("s.json"), None).unwrap(), s);
    }

    #[test]
    fn delta_json_round_trip(s in structure(), eps in 0.0..10.0f64, seed in any::<u64>()) {
        let delta = s.sample(eps, seed);
        let text = format_delta(&delta, &s);
        prop_assert_eq!(parse_delta(&text, &s).unwrap(), delta);
    }

    #[test]
    fn matrix_market_round_trip(n in 1usize..6, values in prop::collection::vec(-1e6..1e6f64, 36)) {
        let m = DenseMatrix::from_fn(n, n, |i, j| values[i * 6 + j]);
        let text = format_matrix_market(&m);
        prop_assert_eq!(parse_matrix_market(&text, Path::new("a.mtx")).unwrap(), m);
    }

    #[test]
    fn inner_solver_terminates_within_edge_count(
        s in structure(),
        eps in 0.1..10.0f64,
        w in prop::collection::vec(-1.0..1.0f64, 8),
    ) {
        let w = &w[..s.len()];
        if let Ok(sol) = solve_inner_weights(eps, w, &s) {
            prop_assert!(sol.theta_history.len() <= s.len());
            prop_assert!(s.is_feasible(&sol.delta, eps, 1e-9));
        }
    }

    #[test]
    fn eigenvalue_gradient_matches_finite_difference(
        values in prop::collection::vec(-2.0..2.0f64, 16),
        dir in prop::collection::vec(-1.0..1.0f64, 16),
    ) {
        let a = DenseMatrix::from_row_slice(4, 4, &values);
        let e = DenseMatrix::from_row_slice(4, 4, &dir);
        let triples = rightmost_eigentriple(&a, DEFAULT_TIE_TOL).unwrap();
        let t = &triples[0];
        // Well-separated simple eigenvalues only.
        let eigs = specradius::linalg::eigenvalues(&a).unwrap();
        let gap = eigs
            .iter()
            .filter(|v| (*v - t.lambda).norm() > 1e-12 && (*v - t.lambda.conj()).norm() > 1e-12)
            .map(|v| (v - t.lambda).norm())
            .fold(f64::INFINITY, f64::min);
        prop_assume!(triples.len() == 1 && gap > 0.1 && t.inner > 0.05);
        let h = 1e-6;
        let re = |m: DenseMatrix| {
            specradius::linalg::eigenvalues(&m)
                .unwrap()
                .into_iter()
                .min_by(|u, v| (u - t.lambda).norm().total_cmp(&(v - t.lambda).norm()))
                .unwrap()
                .re
        };
        let fd = (re(&a + &e * h) - re(&a - &e * h)) / (2.0 * h);
        let grad = t.sensitivity().component_mul(&e).sum() / t.inner;
        prop_assert!((fd - grad).abs() <= 1e-5 * (1.0 + grad.abs()), "fd {} grad {}", fd, grad);
    }

    #[test]
    fn diagonal_cloud_stays_left_of_closed_form(eps in 0.01..0.99f64, seed in any::<u64>()) {
        let a = DenseMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, -2.0]));
        let s = PerturbationStructure::new(2, vec![Edge::free(0, 0)]).unwrap();
        let cloud = sample_pseudospectrum(&a, &s, eps, 50, seed).unwrap();
        prop_assert!(sampled_abscissa(&cloud).unwrap() <= -1.0 + eps + 1e-12);
    }
}

#[test]
fn warm_sweep_is_non_decreasing() {
    let a = example_companion();
    let s = PerturbationStructure::rows(5, [4]).unwrap();
    let grid: Vec<f64> = (0..=24).map(|k| 0.5 * k as f64).collect();
    let opts = AbscissaOptions::default();
    let alphas: Vec<f64> = abscissa_sweep(&a, &s, &grid, RestartPolicy::WarmStart, &opts)
        .iter()
        .map(|p| p.alpha().unwrap())
        .collect();
    assert!(alphas.windows(2).all(|w| w[1] >= w[0] - opts.tol_delta), "{alphas:?}");
    assert!(alphas[0] < 0.0);
}

#[test]
fn restarted_sweep_dominates_warm_sweep() {
    let a = example_companion();
    let s = PerturbationStructure::rows(5, [4]).unwrap();
    let opts = AbscissaOptions::default();
    let grid = [6.0, 12.0];
    let warm = abscissa_sweep(&a, &s, &grid, RestartPolicy::WarmStart, &opts);
    let multi = abscissa_sweep(&a, &s, &grid, RestartPolicy::MultiStart { restarts: 10, seed: 0 }, &opts);
    assert!(multi[1].alpha().unwrap() > 0.0);
    for (m, w) in multi.iter().zip(&warm) {
        assert!(m.alpha().unwrap() >= w.alpha().unwrap() - opts.tol_delta);
    }
}

#[test]
fn companion_cloud_below_solver() {
    let a = example_companion();
    let s = PerturbationStructure::rows(5, [4]).unwrap();
    let opts = AbscissaOptions::default();
    let solved = specradius::abscissa::worst_case_multistart(&a, 3.0, &s, 10, 0, &opts).unwrap();
    let cloud = sample_pseudospectrum(&a, &s, 3.0, 500, 11).unwrap();
    assert!(sampled_abscissa(&cloud).unwrap() <= solved.alpha + 1e-6);
}
