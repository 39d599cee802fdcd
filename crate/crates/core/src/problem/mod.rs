//! Matrix fields, nonlinearity families and sampling-based hypothesis checks.

mod checks;
mod field;
mod model;

pub use checks::{
    check_gradient_consistency, check_infinity_sign, check_linear_growth, check_origin_sign,
    check_reduction_condition, spectral_gap_delta, ConsistencyReport, GrowthReport, InfinityReport,
    MonotonicityBound, OriginReport, ReductionConditionReport, SampleSpec, SpectralGapReport, Witness,
};
pub use field::{matrix_order_compare, sym2_eigenvalues, FieldRole, MatrixField, MatrixOrder, OrderOptions};
pub use model::{
    fd_gradient, fd_hessian, hessian_at_origin, validate_model, ExprNonlinearity, FnNonlinearity, LogQuartic,
    Nonlinearity, NonlinearityModel, QuadraticForm, RadialPerturbation, Sign,
};
