//! Sampling-based checks of the structural hypotheses on `F`.
//!
//! Every check evaluates on a deterministic sample set, reduces per-node
//! results in node order and reports the worst sample as a witness.

use nalgebra::{DMatrix, Matrix2, SymmetricEigen, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::grid::GridDomain;
use crate::problem::model::{fd_gradient, NonlinearityModel, Sign};
use crate::problem::{matrix_order_compare, MatrixField, MatrixOrder, OrderOptions};
use crate::spectral::{apply_mass, distinct_eigenvalues, SpectralSplit, SplitSide};

/// Sample layout: log-spaced radii × evenly spaced directions × grid nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub radii: usize,
    pub directions: usize,
    pub r_min: f64,
    pub r_max: f64,
    /// Every `node_stride`-th node is sampled.
    pub node_stride: usize,
    pub seed: u64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self {
            radii: 64,
            directions: 32,
            r_min: 1e-4,
            r_max: 1e6,
            node_stride: 1,
            seed: 0,
        }
    }
}

impl SampleSpec {
    pub fn with_range(mut self, r_min: f64, r_max: f64) -> Self {
        self.r_min = r_min;
        self.r_max = r_max;
        self
    }

    pub fn radius_list(&self) -> Vec<f64> {
        let n = self.radii.max(2);
        let (lo, hi) = (self.r_min.ln(), self.r_max.ln());
        (0..n).map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp()).collect()
    }

    pub fn direction_list(&self) -> Vec<[f64; 2]> {
        let n = self.directions.max(1);
        (0..n)
            .map(|j| {
                let t = std::f64::consts::TAU * j as f64 / n as f64;
                [t.cos(), t.sin()]
            })
            .collect()
    }

    pub fn node_list(&self, grid: &GridDomain) -> Vec<usize> {
        (0..grid.len()).step_by(self.node_stride.max(1)).collect()
    }
}

/// A sample where a check is tight or fails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub node: usize,
    pub x: [f64; 2],
    pub z: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z2: Option<[f64; 2]>,
    pub value: f64,
}

fn scale(z: [f64; 2], r: f64) -> [f64; 2] {
    [z[0] * r, z[1] * r]
}

fn norm(z: [f64; 2]) -> f64 {
    z[0].hypot(z[1])
}

/// Evaluates `score` on radii × directions for each node in parallel and
/// keeps the per-node minimum; the global minimum is reduced in node order.
fn worst_over<F>(grid: &GridDomain, spec: &SampleSpec, radii: &[f64], score: F) -> Option<Witness>
where
    F: Fn(usize, [f64; 2], [f64; 2]) -> f64 + Sync,
{
    let dirs = spec.direction_list();
    let per_node: Vec<Option<Witness>> = spec
        .node_list(grid)
        .par_iter()
        .map(|&node| {
            let x = grid.node(node);
            let mut worst: Option<Witness> = None;
            for &r in radii {
                for d in &dirs {
                    let z = scale(*d, r);
                    let value = score(node, x, z);
                    if worst.is_none_or(|w| value < w.value || (value.is_nan() && !w.value.is_nan())) {
                        worst = Some(Witness { node, x, z, z2: None, value });
                    }
                }
            }
            worst
        })
        .collect();
    per_node
        .into_iter()
        .flatten()
        .reduce(|a, b| if b.value < a.value || (b.value.is_nan() && !a.value.is_nan()) { b } else { a })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthReport {
    pub holds: bool,
    pub lambda: f64,
    pub worst_ratio: f64,
    pub witness: Option<Witness>,
}

/// `|∇F(x, z)| ≤ Λ |z|` on the sample set.
pub fn check_linear_growth(model: &NonlinearityModel, grid: &GridDomain, spec: &SampleSpec) -> GrowthReport {
    let radii = spec.radius_list();
    let worst = worst_over(grid, spec, &radii, |_, x, z| -norm(model.gradient(x, z)) / norm(z));
    let worst_ratio = worst.map_or(0.0, |w| -w.value);
    let holds = worst_ratio <= model.lambda * (1.0 + 1e-12);
    GrowthReport {
        holds,
        lambda: model.lambda,
        worst_ratio,
        witness: worst.filter(|_| !holds).map(|w| Witness { value: -w.value, ..w }),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub holds: bool,
    pub max_relative_error: f64,
    /// `max |F(x, 0)| + |∇F(x, 0)|` over nodes.
    pub origin_defect: f64,
    pub witness: Option<Witness>,
}

/// Gradient against central differences of `F`, and `F(x,0) = 0`, `∇F(x,0) = 0`.
pub fn check_gradient_consistency(model: &NonlinearityModel, grid: &GridDomain, spec: &SampleSpec) -> ConsistencyReport {
    let radii = SampleSpec { radii: 16, ..*spec }.with_range(1e-2, 1e2).radius_list();
    let worst = worst_over(grid, &SampleSpec { directions: 8, ..*spec }, &radii, |_, x, z| {
        let eps = 1e-5 * norm(z).max(1e-2);
        let fd = fd_gradient(model.potential.as_ref(), x, z, eps);
        let g = model.gradient(x, z);
        let denom = norm(g).max(1e-6 * norm(z)).max(1e-12);
        -norm([fd[0] - g[0], fd[1] - g[1]]) / denom
    });
    let max_relative_error = worst.map_or(0.0, |w| -w.value);
    let origin_defect = spec
        .node_list(grid)
        .iter()
        .map(|&i| {
            let x = grid.node(i);
            let g = model.gradient(x, [0.0; 2]);
            model.value(x, [0.0; 2]).abs() + norm(g)
        })
        .fold(0.0, f64::max);
    let holds = max_relative_error <= 1e-6 && origin_defect <= 1e-14;
    ConsistencyReport {
        holds,
        max_relative_error,
        origin_defect,
        witness: worst.filter(|_| !holds).map(|w| Witness { value: -w.value, ..w }),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OriginReport {
    pub holds: bool,
    pub sign: Sign,
    pub delta: f64,
    pub sign_holds: bool,
    /// `(radius, max over nodes and directions of |G|/|z|²)`, ascending radius.
    pub decay_profile: Vec<(f64, f64)>,
    pub decays: bool,
    pub note: String,
    pub witness: Option<Witness>,
}

/// `± G(x, z) > 0` for `0 < |z| ≤ δ`, and decay of `G / |z|²` toward the origin.
pub fn check_origin_sign(model: &NonlinearityModel, sign: Sign, grid: &GridDomain, spec: &SampleSpec) -> OriginReport {
    let delta = model.delta0;
    let local = spec.with_range(delta * 1e-4, delta);
    let radii = local.radius_list();
    let s = sign.factor();
    let worst = worst_over(grid, spec, &radii, |_, x, z| s * model.origin_remainder(x, z));
    let sign_holds = worst.is_none_or(|w| w.value > 0.0);
    let dirs = spec.direction_list();
    let nodes = spec.node_list(grid);
    let decay_profile: Vec<(f64, f64)> = radii
        .iter()
        .map(|&r| {
            let m = nodes
                .iter()
                .flat_map(|&i| dirs.iter().map(move |d| (i, *d)))
                .map(|(i, d)| model.origin_remainder(grid.node(i), scale(d, r)).abs() / (r * r))
                .fold(0.0, f64::max);
            (r, m)
        })
        .collect();
    let window = (decay_profile.len() / 8).max(1);
    let head = decay_profile[..window].iter().map(|p| p.1).fold(0.0, f64::max);
    let tail = decay_profile[decay_profile.len() - window..].iter().map(|p| p.1).fold(0.0, f64::max);
    let decays = head <= 1e-2 * tail || head <= 1e-12;
    OriginReport {
        holds: sign_holds && decays,
        sign,
        delta,
        sign_holds,
        decay_profile,
        decays,
        note: "uniformity in x is tested as the maximum over grid nodes".into(),
        witness: worst.filter(|_| !sign_holds),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InfinityReport {
    pub holds: bool,
    pub sign: Sign,
    /// Radius from which the extreme value of `H` was seen to diverge monotonically.
    pub divergence_radius: Option<f64>,
    /// `(radius, extreme over nodes and directions of H)`; the maximum for
    /// the minus sign and the minimum for the plus sign.
    pub profile: Vec<(f64, f64)>,
    /// `max(0, sup H)`, the constant bounding `½ A∞ z·z − F` from below by `−M`.
    pub upper_bound_m: f64,
    pub witness: Option<Witness>,
}

/// `H = F − ½ A∞ z·z → ±∞` along every sampled ray.
pub fn check_infinity_sign(model: &NonlinearityModel, sign: Sign, grid: &GridDomain, spec: &SampleSpec) -> InfinityReport {
    let radii = spec.radius_list();
    let dirs = spec.direction_list();
    let nodes = spec.node_list(grid);
    let s = sign.factor();
    let rows: Vec<(f64, f64, Witness, f64)> = radii
        .par_iter()
        .map(|&r| {
            let mut worst: Option<Witness> = None;
            let mut sup = f64::NEG_INFINITY;
            for &i in &nodes {
                let x = grid.node(i);
                for d in &dirs {
                    let z = scale(*d, r);
                    let h = model.infinity_remainder(x, z);
                    sup = sup.max(h);
                    if worst.is_none_or(|w| s * h < s * w.value) {
                        worst = Some(Witness { node: i, x, z, z2: None, value: h });
                    }
                }
            }
            let w = worst.expect("nonempty sample set");
            (r, w.value, w, sup)
        })
        .collect();
    let upper_bound_m = rows.iter().map(|row| row.3).fold(0.0, f64::max);
    let profile: Vec<(f64, f64)> = rows.iter().map(|row| (row.0, row.1)).collect();
    let tail_start = profile.len() - (profile.len() / 4).max(2);
    let tail = &profile[tail_start..];
    let increments: Vec<f64> = tail.windows(2).map(|w| s * (w[1].1 - w[0].1)).collect();
    let monotone = increments.iter().all(|&d| d > 0.0);
    let sustained = match (increments.first(), increments.last()) {
        (Some(&first), Some(&last)) => last >= 1e-3 * first,
        _ => false,
    };
    let holds = monotone && sustained;
    InfinityReport {
        holds,
        sign,
        divergence_radius: holds.then(|| tail[0].0),
        profile,
        upper_bound_m,
        witness: if holds { None } else { rows.last().map(|r| r.2) },
    }
}

/// Which one-sided monotonicity inequality is tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonotonicityBound {
    /// `(∇F(z₁) − ∇F(z₂))·(z₁ − z₂) ≥ β (z₁ − z₂)·(z₁ − z₂)` with `β ⪰ λ_{k−1} A∞`.
    Lower,
    /// `(∇F(z₁) − ∇F(z₂))·(z₁ − z₂) ≤ β (z₁ − z₂)·(z₁ − z₂)` with `β ⪯ λ_{k+1} A∞`.
    Upper,
}

impl MonotonicityBound {
    pub fn for_side(side: SplitSide) -> Self {
        match side {
            SplitSide::AMinusCase => MonotonicityBound::Lower,
            SplitSide::APlusCase => MonotonicityBound::Upper,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReductionConditionReport {
    pub holds: bool,
    pub bound: MonotonicityBound,
    /// Worst normalized slack over the sampled pairs; negative on violation.
    pub margin: f64,
    pub inequality_holds: bool,
    /// Eigenvalue of `A∞` the bound field is compared against.
    pub comparison_eigenvalue: f64,
    pub ordering: MatrixOrder,
    pub ordering_holds: bool,
    pub witness: Option<Witness>,
}

/// Monotonicity of `∇F` against `β` on sampled pairs, plus the ordering of
/// `β` against the neighbouring multiple of `A∞`.
pub fn check_reduction_condition(
    model: &NonlinearityModel,
    beta: &MatrixField,
    bound: MonotonicityBound,
    grid: &GridDomain,
    spec: &SampleSpec,
) -> crate::Result<ReductionConditionReport> {
    let s = match bound {
        MonotonicityBound::Lower => 1.0,
        MonotonicityBound::Upper => -1.0,
    };
    let radii = spec.with_range(spec.r_min, spec.r_max.min(1e3)).radius_list();
    let dirs = spec.direction_list();
    let per_node: Vec<Witness> = spec
        .node_list(grid)
        .par_iter()
        .map(|&node| {
            let x = grid.node(node);
            let b = beta.at(x);
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ (node as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mut worst = Witness { node, x, z: [0.0; 2], z2: None, value: f64::INFINITY };
            for &r in &radii {
                for d in &dirs {
                    let z1 = scale(*d, r);
                    let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                    let rho = r * 10f64.powf(rng.gen_range(-3.0..0.5));
                    let z2 = [z1[0] + rho * t.cos(), z1[1] + rho * t.sin()];
                    let (g1, g2) = (model.gradient(x, z1), model.gradient(x, z2));
                    let dz = Vector2::new(z1[0] - z2[0], z1[1] - z2[1]);
                    let dg = Vector2::new(g1[0] - g2[0], g1[1] - g2[1]);
                    let n2 = dz.norm_squared();
                    let slack = s * (dg.dot(&dz) - dz.dot(&(b * dz))) / n2;
                    if slack < worst.value {
                        worst = Witness { node, x, z: z1, z2: Some(z2), value: slack };
                    }
                }
            }
            worst
        })
        .collect();
    let worst = per_node
        .into_iter()
        .reduce(|a, b| if b.value < a.value { b } else { a })
        .expect("nonempty sample set");
    let scale_tol = 1e-8 * beta.sup_norm(grid).max(1.0);
    let inequality_holds = worst.value >= -scale_tol;
    let distinct = distinct_eigenvalues(grid, &model.ainf)?;
    let k = model.k;
    let (comparison_eigenvalue, ordering, ordering_holds) = match bound {
        MonotonicityBound::Lower => {
            let lam = if k >= 2 { distinct.get(k - 2).map_or(f64::NAN, |e| e.0) } else { 0.0 };
            let order = matrix_order_compare(&model.ainf.scaled(lam), beta, grid, OrderOptions::default());
            (lam, order, order == MatrixOrder::StrictPreceq)
        }
        MonotonicityBound::Upper => {
            let lam = distinct.get(k).map_or(f64::NAN, |e| e.0);
            let order = matrix_order_compare(beta, &model.ainf.scaled(lam), grid, OrderOptions::default());
            (lam, order, order == MatrixOrder::StrictPreceq)
        }
    };
    Ok(ReductionConditionReport {
        holds: inequality_holds && ordering_holds,
        bound,
        margin: worst.value,
        inequality_holds,
        comparison_eigenvalue,
        ordering,
        ordering_holds,
        witness: (!inequality_holds).then_some(worst),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralGapReport {
    /// `None` when the finite side is empty and the bound is vacuous.
    pub delta: Option<f64>,
    pub vacuous: bool,
    pub warning: Option<String>,
}

/// Smallest eigenvalue of the quadratic form `±(−‖z‖² + ∫ β z·z)` restricted
/// to the finite side of the split, relative to `‖z‖²`.
pub fn spectral_gap_delta(beta: &MatrixField, split: &SpectralSplit, grid: &GridDomain) -> SpectralGapReport {
    let (basis, s) = match split.side() {
        SplitSide::AMinusCase => (split.plus_basis(), 1.0),
        SplitSide::APlusCase => (split.minus_basis(), -1.0),
    };
    if basis.ncols() == 0 {
        return SpectralGapReport {
            delta: None,
            vacuous: true,
            warning: None,
        };
    }
    let samples: Vec<Matrix2<f64>> = beta.sample(grid);
    let w = grid.quadrature_weight();
    let mut mb = DMatrix::zeros(basis.nrows(), basis.ncols());
    for j in 0..basis.ncols() {
        mb.set_column(j, &apply_mass(&samples, &basis.column(j).into_owned()));
    }
    let form = (basis.transpose() * mb * w - DMatrix::identity(basis.ncols(), basis.ncols())) * s;
    let form = (&form + form.transpose()) * 0.5;
    let delta = SymmetricEigen::new(form).eigenvalues.min();
    SpectralGapReport {
        delta: Some(delta),
        vacuous: false,
        warning: (delta <= 0.0).then(|| format!("spectral gap {delta:e} is not positive")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::model::{ExprNonlinearity, FnNonlinearity};
    use crate::problem::FieldRole;
    use crate::spectral::{build_split, normalize_resonance, solve_weighted_eigenproblem};

    fn grid() -> GridDomain {
        GridDomain::unit_interval(7).unwrap()
    }

    fn small_spec() -> SampleSpec {
        SampleSpec {
            radii: 24,
            directions: 12,
            ..SampleSpec::default()
        }
    }

    fn expr_model(src: &str, lambda: f64) -> NonlinearityModel {
        let zero = MatrixField::constant(FieldRole::Other, Matrix2::zeros());
        NonlinearityModel::new(src, ExprNonlinearity::parse(src).unwrap(), lambda, zero.clone(), zero)
    }

    #[test]
    fn growth_of_identity_quadratic() {
        let m = NonlinearityModel::quadratic(MatrixField::identity(FieldRole::Other), 1.0);
        let r = check_linear_growth(&m, &grid(), &small_spec());
        assert!(r.holds);
        assert!((r.worst_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn growth_of_log_perturbation() {
        let ainf = MatrixField::diag(FieldRole::Ainf, 3.0, 1.0);
        let m = NonlinearityModel::log_quartic(ainf, 1.0, 0.0, 0.0, 3.0);
        assert_eq!(m.lambda, 5.0);
        let r = check_linear_growth(&m, &grid(), &small_spec());
        assert!(r.holds, "{r:?}");
    }

    #[test]
    fn cubic_growth_fails_far_out() {
        let m = expr_model("sqrt(u*u + v*v) * (u*u + v*v)", 10.0);
        let r = check_linear_growth(&m, &grid(), &small_spec());
        assert!(!r.holds);
        assert!(norm(r.witness.unwrap().z) > 1.0);
    }

    #[test]
    fn origin_sign_examples() {
        let g = grid();
        let mut m = expr_model("-(u*u + v*v)*(u*u + v*v)", 1.0);
        m.delta0 = 5.0;
        assert!(check_origin_sign(&m, Sign::Minus, &g, &small_spec()).holds);
        assert!(!check_origin_sign(&m, Sign::Plus, &g, &small_spec()).holds);
        let mut p = expr_model("(u*u + v*v)*(u*u + v*v) - (u*u + v*v)*(u*u + v*v)*(u*u + v*v)", 1.0);
        p.delta0 = 0.9;
        assert!(check_origin_sign(&p, Sign::Plus, &g, &small_spec()).holds);
        p.delta0 = 1.1;
        assert!(!check_origin_sign(&p, Sign::Plus, &g, &small_spec()).sign_holds);
    }

    #[test]
    fn non_decaying_remainder_is_flagged() {
        let mut m = expr_model("(u*u + v*v) * (2 + sin(1/(u*u + v*v)))", 1.0);
        m.delta0 = 0.5;
        let r = check_origin_sign(&m, Sign::Plus, &grid(), &small_spec());
        assert!(r.sign_holds);
        assert!(!r.decays);
        assert!(!r.holds);
    }

    #[test]
    fn infinity_sign_examples() {
        let g = grid();
        let spec = small_spec();
        let minus = expr_model("-ln(1 + u*u + v*v)", 2.0);
        let r = check_infinity_sign(&minus, Sign::Minus, &g, &spec);
        assert!(r.holds);
        assert_eq!(r.upper_bound_m, 0.0);
        assert!(!check_infinity_sign(&minus, Sign::Plus, &g, &spec).holds);
        let plus = expr_model("ln(1 + u*u + v*v)", 2.0);
        assert!(check_infinity_sign(&plus, Sign::Plus, &g, &spec).holds);
        let osc = expr_model("sin(sqrt(u*u + v*v))", 1.0);
        assert!(!check_infinity_sign(&osc, Sign::Plus, &g, &spec).holds);
        assert!(!check_infinity_sign(&osc, Sign::Minus, &g, &spec).holds);
        let bounded = expr_model("-(u*u + v*v) / (1 + u*u + v*v)", 2.0);
        assert!(!check_infinity_sign(&bounded, Sign::Minus, &g, &spec).holds);
    }

    fn resonant_log_model(g: &GridDomain) -> NonlinearityModel {
        let (ainf, _) = normalize_resonance(&MatrixField::diag(FieldRole::Ainf, 1.0, 3.0), 2, g).unwrap();
        let norm = ainf.sup_norm(g);
        let mut m = NonlinearityModel::log_quartic(ainf, 1.0, 0.0, 0.0, norm);
        m.k = 2;
        m
    }

    #[test]
    fn log_perturbation_satisfies_lower_bound() {
        let g = grid();
        let mut m = resonant_log_model(&g);
        // β = A∞ − 2I, the analytic bound, rather than the scanned one
        let beta = m.ainf.shifted(-2.0);
        m.beta = Some(beta.clone());
        let r = check_reduction_condition(&m, &beta, MonotonicityBound::Lower, &g, &small_spec()).unwrap();
        assert!(r.inequality_holds, "{r:?}");
        assert!(r.margin >= -1e-9);
        assert!(r.ordering_holds, "{r:?}");
    }

    #[test]
    fn linear_nonlinearity_is_tight() {
        let g = grid();
        let c = MatrixField::diag(FieldRole::Other, 2.0, 3.0);
        let m = NonlinearityModel::quadratic(c.clone(), 3.0);
        let r = check_reduction_condition(&m, &c, MonotonicityBound::Lower, &g, &small_spec()).unwrap();
        assert!(r.inequality_holds);
        assert!(r.margin.abs() < 1e-9);
    }

    #[test]
    fn slope_jump_violates_bound() {
        let g = grid();
        let zero = MatrixField::constant(FieldRole::Other, Matrix2::zeros());
        // ∇F has slope 1 for u < 1 and slope −5 beyond: decreasing somewhere
        let f = FnNonlinearity::new(
            "kinked",
            |_, z| if z[0] < 1.0 { 0.5 * z[0] * z[0] } else { 0.5 + (z[0] - 1.0) - 2.5 * (z[0] - 1.0).powi(2) },
            |_, z| [if z[0] < 1.0 { z[0] } else { 1.0 - 5.0 * (z[0] - 1.0) }, 0.0],
        );
        let m = NonlinearityModel::new("kinked", f, 10.0, zero.clone(), MatrixField::identity(FieldRole::Ainf));
        let r = check_reduction_condition(&m, &zero, MonotonicityBound::Lower, &g, &small_spec()).unwrap();
        assert!(!r.inequality_holds);
        assert!(r.witness.is_some());
    }

    #[test]
    fn spectral_gap_examples() {
        let g = grid();
        let (ainf, _) = normalize_resonance(&MatrixField::diag(FieldRole::Ainf, 1.0, 3.0), 3, &g).unwrap();
        let s = solve_weighted_eigenproblem(&g, &ainf, g.field_len()).unwrap();
        let split = build_split(&s, 3, SplitSide::AMinusCase).unwrap();
        let r = spectral_gap_delta(&ainf, &split, &g);
        let expected = (1.0 / s.eigenvalue(2).unwrap() - 1.0).min(1.0 / s.eigenvalue(1).unwrap() - 1.0);
        assert!((r.delta.unwrap() - expected).abs() < 1e-9);
        let zero = MatrixField::constant(FieldRole::Beta, Matrix2::zeros());
        assert!((spectral_gap_delta(&zero, &split, &g).delta.unwrap() + 1.0).abs() < 1e-12);
        let vacuous = build_split(&s, 1, SplitSide::AMinusCase).unwrap();
        let r = spectral_gap_delta(&ainf, &vacuous, &g);
        assert!(r.vacuous && r.delta.is_none());
    }

    #[test]
    fn builtin_families_have_consistent_gradients() {
        let g = grid();
        let m = resonant_log_model(&g);
        assert!(check_gradient_consistency(&m, &g, &small_spec()).holds);
        let q = NonlinearityModel::log_quartic(MatrixField::identity(FieldRole::Ainf), 1.0, 3.47, 4.0, 1.0);
        let r = check_gradient_consistency(&q, &g, &small_spec());
        assert!(r.holds, "{r:?}");
        let flipped = NonlinearityModel::log_quartic(MatrixField::identity(FieldRole::Ainf), -1.0, 0.0, -2.0, 1.0);
        assert!(check_gradient_consistency(&flipped, &g, &small_spec()).holds);
    }
}
