//! Fixtures shared by the benchmarks.

use nalgebra::DVector;
use saddle_core::functional::FunctionalHandle;
use saddle_core::problem::{FieldRole, MatrixField, NonlinearityModel};
use saddle_core::reduction::{verify_condition, PairSampler, PdeSplitFunctional, ReductionHandle};
use saddle_core::spectral::{build_split, normalize_resonance, resonance_shift, solve_weighted_eigenproblem, SplitSide};
use saddle_core::GridDomain;

/// The resonant log-quartic instance on a 1D grid of `nodes` nodes, reduced
/// along the split below the second eigenvalue of `A∞`.
pub fn resonant_reduction(nodes: usize) -> ReductionHandle<PdeSplitFunctional> {
    let grid = GridDomain::unit_interval(nodes).expect("valid grid");
    let (ainf, _) = normalize_resonance(&MatrixField::diag(FieldRole::Ainf, 3.5, 1.0), 2, &grid).expect("spectrum");
    let shift = resonance_shift(&ainf, 3, &grid).expect("shift");
    let mut model = NonlinearityModel::log_quartic(ainf.clone(), 1.0, 1.0 + shift / 2.0, 4.0, ainf.sup_norm(&grid));
    model.k = 2;
    model.m = 3;
    let spectrum = solve_weighted_eigenproblem(&grid, &ainf, grid.field_len()).expect("spectrum");
    let split = build_split(&spectrum, 2, SplitSide::AMinusCase).expect("split");
    let system = PdeSplitFunctional::new(FunctionalHandle::new(grid, model).expect("model"), split).expect("system");
    let kappa = verify_condition(&system, &PairSampler::default())
        .kappa_est
        .expect("nonempty fiber");
    ReductionHandle::new(system, kappa).expect("positive constant")
}

/// Deterministic point of norm `radius` in a space of dimension `dim`.
pub fn probe_point(dim: usize, radius: f64) -> DVector<f64> {
    let v = DVector::from_fn(dim, |i, _| ((i as f64 + 1.0) * 0.618_033_988_75).fract() - 0.5);
    let n = v.norm();
    v * (radius / n)
}
