//! Property tests for invariants that span several modules.

use nalgebra::DVector;
use proptest::prelude::*;

use saddle_core::functional::FunctionalHandle;
use saddle_core::homology::{critical_groups, kunneth_check, HomologyOptions, KunnethEntry, ModelFunctional};
use saddle_core::problem::{
    fd_gradient, matrix_order_compare, FieldRole, MatrixField, MatrixOrder, NonlinearityModel, OrderOptions,
};
use saddle_core::reduction::{verify_condition, PairSampler, PdeSplitFunctional, ReductionHandle, SplitFunctional};
use saddle_core::spectral::{build_split, normalize_resonance, solve_weighted_eigenproblem, SplitSide};
use saddle_core::{GridDomain, VectorField2};

fn log_model(grid: &GridDomain, k: usize, c: f64) -> NonlinearityModel {
    let (ainf, _) = normalize_resonance(&MatrixField::diag(FieldRole::Ainf, 2.0, 1.0), k, grid).unwrap();
    let mut model = NonlinearityModel::log_quartic(ainf.clone(), c, c, 4.0, ainf.sup_norm(grid));
    model.k = k;
    model
}

/// `Σ sᵢ xᵢ²` with the given signs.
fn quadratic_form(signs: Vec<f64>) -> ModelFunctional {
    let g = signs.clone();
    ModelFunctional::new(
        "quadratic_form",
        signs.len(),
        move |x| x.iter().zip(&signs).map(|(x, s)| s * x * x).sum(),
        move |x| x.iter().zip(&g).map(|(x, s)| 2.0 * s * x).collect(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn laplacian_is_symmetric_positive_definite(n in 3usize..40) {
        let grid = GridDomain::unit_interval(n).unwrap();
        let l = grid.laplacian();
        prop_assert!((&l - l.transpose()).abs().max() <= 1e-12 * l.abs().max());
        prop_assert!(l.symmetric_eigenvalues().min() > 0.0);
    }

    #[test]
    fn h10_norm_vanishes_only_at_zero(values in prop::collection::vec(-5.0f64..5.0, 2 * 12)) {
        let grid = GridDomain::unit_interval(12).unwrap();
        let z = VectorField2::from_vector(&grid, DVector::from_vec(values.clone())).unwrap();
        let norm = grid.h10_norm(&z).unwrap();
        let zero = values.iter().all(|v| *v == 0.0);
        prop_assert_eq!(norm == 0.0, zero);
    }

    #[test]
    fn cumulative_dims_grow_by_multiplicity(a in 0.5f64..4.0, b in 0.5f64..4.0) {
        let grid = GridDomain::unit_interval(20).unwrap();
        let s = solve_weighted_eigenproblem(&grid, &MatrixField::diag(FieldRole::Other, a, b), grid.field_len()).unwrap();
        let mult = s.multiplicities();
        let mut prev = 0;
        for (i, m) in mult.iter().enumerate() {
            let d = s.cumulative_dims(i + 1).unwrap();
            prop_assert_eq!(d, prev + m);
            prev = d;
        }
        prop_assert_eq!(prev, grid.field_len());
    }

    #[test]
    fn split_coordinates_reconstruct_the_field(k in 1usize..6, seed in 0u64..1000) {
        let grid = GridDomain::unit_interval(25).unwrap();
        let model = log_model(&grid, k, 1.0);
        let spectrum = solve_weighted_eigenproblem(&grid, &model.ainf, grid.field_len()).unwrap();
        let split = build_split(&spectrum, k, SplitSide::AMinusCase).unwrap();
        let system = PdeSplitFunctional::new(FunctionalHandle::new(grid.clone(), model).unwrap(), split).unwrap();
        let z = DVector::from_fn(grid.field_len(), |i, _| ((i as u64 * 7919 + seed) % 97) as f64 / 97.0 - 0.5);
        let (v, w) = system.coordinates(&z);
        let back = system.add_plus(&system.lift_minus(&v), &w);
        prop_assert!((&back - &z).norm() <= 1e-8 * z.norm());
    }

    #[test]
    fn log_family_gradient_matches_differences(c in -2.0f64..2.0, u in -30.0f64..30.0, v in -30.0f64..30.0, node in 0usize..15) {
        let grid = GridDomain::unit_interval(15).unwrap();
        let model = log_model(&grid, 2, c);
        let x = grid.node(node);
        let g = model.gradient(x, [u, v]);
        let eps = 1e-6 * (1.0 + u.abs().max(v.abs()));
        let fd = fd_gradient(model.potential.as_ref(), x, [u, v], eps);
        let scale = g[0].abs().max(g[1].abs()).max(1.0);
        for j in 0..2 {
            prop_assert!((g[j] - fd[j]).abs() <= 1e-6 * scale);
        }
    }

    #[test]
    fn matrix_order_is_reflexive_and_antisymmetric(a in 0.1f64..5.0, b in 0.1f64..5.0, d in 0.0f64..2.0) {
        let grid = GridDomain::unit_interval(10).unwrap();
        let lo = MatrixField::diag(FieldRole::Other, a, b);
        let hi = lo.shifted(d);
        prop_assert_ne!(matrix_order_compare(&lo, &lo, &grid, OrderOptions::default()), MatrixOrder::Incomparable);
        prop_assert_ne!(matrix_order_compare(&lo, &hi, &grid, OrderOptions::default()), MatrixOrder::Incomparable);
        if d > 1e-6 {
            prop_assert_eq!(matrix_order_compare(&hi, &lo, &grid, OrderOptions::default()), MatrixOrder::Incomparable);
        }
    }

    #[test]
    fn normalization_places_resonance_at_one(k in 1usize..8, a in 0.5f64..5.0) {
        let grid = GridDomain::unit_interval(30).unwrap();
        let (ainf, _) = normalize_resonance(&MatrixField::diag(FieldRole::Ainf, a, 1.0), k, &grid).unwrap();
        let s = solve_weighted_eigenproblem(&grid, &ainf, grid.field_len()).unwrap();
        prop_assert!((s.eigenvalue(k).unwrap() - 1.0).abs() <= 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn fiber_is_stationary_and_dominates_restriction(seed in 0u64..10_000, r in 0.1f64..20.0) {
        let grid = GridDomain::unit_interval(31).unwrap();
        let model = log_model(&grid, 3, 1.0);
        let spectrum = solve_weighted_eigenproblem(&grid, &model.ainf, grid.field_len()).unwrap();
        let split = build_split(&spectrum, 3, SplitSide::AMinusCase).unwrap();
        let system = PdeSplitFunctional::new(FunctionalHandle::new(grid, model).unwrap(), split).unwrap();
        let kappa = verify_condition(&system, &PairSampler::default()).kappa_est.unwrap();
        let handle = ReductionHandle::new(system, kappa).unwrap();
        let dim = handle.system().minus_dim();
        let v = DVector::from_fn(dim, |i, _| (((i as u64 + 1) * 2654435761 + seed) % 1000) as f64 / 500.0 - 1.0);
        let v = &v * (r / v.norm());
        let p = handle.reduce(&v).unwrap();
        prop_assert!(handle.system().plus_gradient_at(&p.full).norm() <= handle.inner_tol());
        prop_assert!(p.value >= handle.restricted_value(&v) - 1e-12 * p.value.abs().max(1.0));
        // The reduced gradient is the minus part of the full gradient at the lifted point.
        let minus = handle.system().minus_gradient_at(&p.full);
        prop_assert!((&minus - &p.gradient).norm() <= 1e-8 * minus.norm().max(1.0));
    }

    #[test]
    fn nondegenerate_points_have_concentrated_groups(signs in prop::collection::vec(prop::bool::ANY, 1..=2)) {
        let signs: Vec<f64> = signs.iter().map(|&s| if s { 1.0 } else { -1.0 }).collect();
        let index = signs.iter().filter(|&&s| s < 0.0).count();
        let f = quadratic_form(signs.clone());
        let b = critical_groups(&f, &vec![0.0; signs.len()], &HomologyOptions::default()).unwrap();
        prop_assert!(b.stable);
        prop_assert_eq!(b.ranks.clone(), (0..=signs.len()).map(|q| usize::from(q == index)).collect::<Vec<_>>());
    }

    #[test]
    fn product_groups_convolve(first in prop::bool::ANY, second in prop::bool::ANY) {
        let one = |s: bool| quadratic_form(vec![if s { 1.0 } else { -1.0 }]);
        let (a, b) = (one(first), one(second));
        let (pa, pb) = (a.clone(), b.clone());
        let (ga, gb) = (a.clone(), b.clone());
        let product = ModelFunctional::new(
            "product",
            2,
            move |x| pa.value(&x[..1]) + pb.value(&x[1..]),
            move |x| vec![ga.gradient(&x[..1])[0], gb.gradient(&x[1..])[0]],
        );
        let r = kunneth_check(&KunnethEntry { product, first: a, second: b }, &HomologyOptions::default()).unwrap();
        prop_assert!(r.holds && r.stable);
    }
}
