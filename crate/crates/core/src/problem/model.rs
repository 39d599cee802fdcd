use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Bindings, Expr, Var};
use crate::problem::{FieldRole, MatrixField};

/// A potential `F(x, z)` with its gradient in `z`.
pub trait Nonlinearity: Send + Sync {
    fn value(&self, x: [f64; 2], z: [f64; 2]) -> f64;
    fn gradient(&self, x: [f64; 2], z: [f64; 2]) -> [f64; 2];
    fn describe(&self) -> String;
}

/// Sign tag of the origin and infinity conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// `F` together with the data the multiplicity theorems are stated in.
#[derive(Clone)]
pub struct NonlinearityModel {
    pub name: String,
    pub potential: Arc<dyn Nonlinearity>,
    /// Linear growth constant of the gradient.
    pub lambda: f64,
    /// Weight of the quadratic part at the origin.
    pub a0: MatrixField,
    /// Weight of the quadratic part at infinity.
    pub ainf: MatrixField,
    /// Monotonicity bound of the gradient, if one is known.
    pub beta: Option<MatrixField>,
    /// Radius of the ball on which the origin sign condition is expected.
    pub delta0: f64,
    pub origin_sign: Option<Sign>,
    pub infinity_sign: Option<Sign>,
    /// Resonance index at infinity.
    pub k: usize,
    /// Resonance index at the origin.
    pub m: usize,
}

impl fmt::Debug for NonlinearityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonlinearityModel")
            .field("name", &self.name)
            .field("potential", &self.potential.describe())
            .field("lambda", &self.lambda)
            .field("a0", &self.a0)
            .field("ainf", &self.ainf)
            .field("beta", &self.beta)
            .field("delta0", &self.delta0)
            .field("origin_sign", &self.origin_sign)
            .field("infinity_sign", &self.infinity_sign)
            .field("k", &self.k)
            .field("m", &self.m)
            .finish()
    }
}

fn quad(m: &Matrix2<f64>, z: [f64; 2]) -> f64 {
    let v = Vector2::new(z[0], z[1]);
    v.dot(&(m * v))
}

impl NonlinearityModel {
    /// A model with no sign or resonance data; the caller fills in what applies.
    pub fn new(
        name: impl Into<String>,
        potential: impl Nonlinearity + 'static,
        lambda: f64,
        a0: MatrixField,
        ainf: MatrixField,
    ) -> Self {
        Self {
            name: name.into(),
            potential: Arc::new(potential),
            lambda,
            a0: a0.with_role(FieldRole::A0),
            ainf: ainf.with_role(FieldRole::Ainf),
            beta: None,
            delta0: 1.0,
            origin_sign: None,
            infinity_sign: None,
            k: 0,
            m: 0,
        }
    }

    /// `F = 0`.
    pub fn zero() -> Self {
        let zero = MatrixField::constant(FieldRole::Other, Matrix2::zeros());
        let mut model = Self::new("zero", QuadraticForm::new(zero.clone()), 0.0, zero.clone(), zero);
        model.beta = Some(MatrixField::constant(FieldRole::Beta, Matrix2::zeros()));
        model
    }

    /// `F = ½ C z·z`; `c_norm` bounds the spectral norm of `C` over the domain.
    pub fn quadratic(c: MatrixField, c_norm: f64) -> Self {
        let mut model = Self::new("quadratic", QuadraticForm::new(c.clone()), c_norm, c.clone(), c.clone());
        model.beta = Some(c.with_role(FieldRole::Beta));
        model
    }

    /// `F = ½ A∞ z·z + P(|z|²)` with the radial profile of [`LogQuartic`];
    /// `ainf_norm` bounds the spectral norm of `A∞` over the domain.
    pub fn log_quartic(ainf: MatrixField, c: f64, a: f64, q: f64, ainf_norm: f64) -> Self {
        let profile = LogQuartic { c, a, q };
        let lambda = ainf_norm + 2.0 * profile.derivative_bound();
        let a0 = ainf.shifted(2.0 * (a - c));
        let (gamma_min, _) = profile.hessian_range();
        let slack = 1e-3 * (c.abs() + a.abs() + q.abs());
        let beta = ainf.shifted(gamma_min - slack).with_role(FieldRole::Beta);
        let origin = profile.origin_coefficient();
        let origin_sign = if origin > 0.0 {
            Some(Sign::Plus)
        } else if origin < 0.0 {
            Some(Sign::Minus)
        } else {
            None
        };
        let infinity_sign = if c > 0.0 {
            Some(Sign::Minus)
        } else if c < 0.0 {
            Some(Sign::Plus)
        } else {
            None
        };
        let delta0 = origin_sign.map_or(1.0, |s| profile.sign_radius(s.factor()));
        let potential = RadialPerturbation {
            ainf: ainf.clone(),
            profile,
        };
        let mut model = Self::new(potential.describe(), potential, lambda, a0, ainf);
        model.beta = Some(beta);
        model.origin_sign = origin_sign;
        model.infinity_sign = infinity_sign;
        model.delta0 = delta0;
        model
    }

    /// Monotonicity bound for the dual orientation: `A∞ + sup Hess P`.
    pub fn log_quartic_upper_beta(&self, c: f64, a: f64, q: f64) -> MatrixField {
        let profile = LogQuartic { c, a, q };
        let slack = 1e-3 * (c.abs() + a.abs() + q.abs());
        self.ainf
            .shifted(profile.hessian_range().1 + slack)
            .with_role(FieldRole::Beta)
    }

    pub fn value(&self, x: [f64; 2], z: [f64; 2]) -> f64 {
        self.potential.value(x, z)
    }

    pub fn gradient(&self, x: [f64; 2], z: [f64; 2]) -> [f64; 2] {
        self.potential.gradient(x, z)
    }

    /// `G = F − ½ A₀ z·z`.
    pub fn origin_remainder(&self, x: [f64; 2], z: [f64; 2]) -> f64 {
        self.value(x, z) - 0.5 * quad(&self.a0.at(x), z)
    }

    /// `H = F − ½ A∞ z·z`.
    pub fn infinity_remainder(&self, x: [f64; 2], z: [f64; 2]) -> f64 {
        self.value(x, z) - 0.5 * quad(&self.ainf.at(x), z)
    }
}

/// `F = ½ C z·z`.
pub struct QuadraticForm {
    c: MatrixField,
}

impl QuadraticForm {
    pub fn new(c: MatrixField) -> Self {
        Self { c }
    }
}

impl Nonlinearity for QuadraticForm {
    fn value(&self, x: [f64; 2], z: [f64; 2]) -> f64 {
        0.5 * quad(&self.c.at(x), z)
    }

    fn gradient(&self, x: [f64; 2], z: [f64; 2]) -> [f64; 2] {
        let g = self.c.at(x) * Vector2::new(z[0], z[1]);
        [g[0], g[1]]
    }

    fn describe(&self) -> String {
        format!("0.5 * C z.z, C = {}", self.c.description())
    }
}

/// Radial profile `P(s) = −c ln(1+s) + a s/(1+s) + q s²/(1+s)²` in `s = |z|²`.
///
/// `P(s) = (a − c) s + (c/2 − a + q) s² + O(s³)` near 0 and
/// `P(s) = −c ln s + O(1)` at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogQuartic {
    pub c: f64,
    pub a: f64,
    pub q: f64,
}

impl LogQuartic {
    pub fn value(&self, s: f64) -> f64 {
        let t = s / (1.0 + s);
        -self.c * s.ln_1p() + self.a * t + self.q * t * t
    }

    pub fn derivative(&self, s: f64) -> f64 {
        let w = 1.0 / (1.0 + s);
        -self.c * w + self.a * w * w + 2.0 * self.q * s * w * w * w
    }

    pub fn second_derivative(&self, s: f64) -> f64 {
        let w = 1.0 / (1.0 + s);
        self.c * w * w - 2.0 * self.a * w * w * w + 2.0 * self.q * (1.0 - 2.0 * s) * w.powi(4)
    }

    /// `sup |P'|`, bounded termwise; `s/(1+s)³ ≤ 4/27`.
    pub fn derivative_bound(&self) -> f64 {
        self.c.abs() + self.a.abs() + 8.0 * self.q.abs() / 27.0
    }

    /// Coefficient of `|z|⁴` in `G` near the origin.
    pub fn origin_coefficient(&self) -> f64 {
        0.5 * self.c - self.a + self.q
    }

    /// `P(s) − (a − c) s`, the part of `F` beyond the origin quadratic.
    pub fn origin_remainder(&self, s: f64) -> f64 {
        self.value(s) - (self.a - self.c) * s
    }

    /// Smallest and largest eigenvalue of `Hess_z P(|z|²)` over all `z`,
    /// from a dense logarithmic scan of the tangential `2P'` and radial
    /// `2P' + 4sP''` branches.
    pub fn hessian_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let samples = std::iter::once(0.0).chain((0..=8000).map(|i| 10f64.powf(-8.0 + 16.0 * i as f64 / 8000.0)));
        for s in samples {
            let t = 2.0 * self.derivative(s);
            let r = t + 4.0 * s * self.second_derivative(s);
            lo = lo.min(t.min(r));
            hi = hi.max(t.max(r));
        }
        (lo, hi)
    }

    /// Radius below which `sign · (P(s) − (a−c)s) > 0`, scaled by 0.9 and capped at 1.
    fn sign_radius(&self, sign: f64) -> f64 {
        let mut last = 1.0;
        for i in 1..=4000 {
            let r = 10f64.powf(-4.0 + 5.0 * i as f64 / 4000.0);
            if r > 1.0 {
                break;
            }
            if sign * self.origin_remainder(r * r) <= 0.0 {
                return 0.9 * last;
            }
            last = r;
        }
        1.0
    }
}

/// `F = ½ A∞ z·z + P(|z|²)`.
pub struct RadialPerturbation {
    pub ainf: MatrixField,
    pub profile: LogQuartic,
}

impl Nonlinearity for RadialPerturbation {
    fn value(&self, x: [f64; 2], z: [f64; 2]) -> f64 {
        0.5 * quad(&self.ainf.at(x), z) + self.profile.value(z[0] * z[0] + z[1] * z[1])
    }

    fn gradient(&self, x: [f64; 2], z: [f64; 2]) -> [f64; 2] {
        let g = self.ainf.at(x) * Vector2::new(z[0], z[1]);
        let d = 2.0 * self.profile.derivative(z[0] * z[0] + z[1] * z[1]);
        [g[0] + d * z[0], g[1] + d * z[1]]
    }

    fn describe(&self) -> String {
        let LogQuartic { c, a, q } = self.profile;
        format!("log-quartic(c = {c}, a = {a}, q = {q})")
    }
}

/// `F` given by an expression in `x1, x2, u, v`, differentiated symbolically.
pub struct ExprNonlinearity {
    source: String,
    f: Expr,
    du: Expr,
    dv: Expr,
}

impl ExprNonlinearity {
    pub fn parse(source: &str) -> Result<Self> {
        let f = Expr::parse(source)?;
        let du = f.derivative(Var::U);
        let dv = f.derivative(Var::V);
        Ok(Self {
            source: source.to_owned(),
            f,
            du,
            dv,
        })
    }
}

impl Nonlinearity for ExprNonlinearity {
    fn value(&self, x: [f64; 2], z: [f64; 2]) -> f64 {
        self.f.eval(&Bindings { x, z })
    }

    fn gradient(&self, x: [f64; 2], z: [f64; 2]) -> [f64; 2] {
        let b = Bindings { x, z };
        [self.du.eval(&b), self.dv.eval(&b)]
    }

    fn describe(&self) -> String {
        self.source.clone()
    }
}

type ValueFn = dyn Fn([f64; 2], [f64; 2]) -> f64 + Send + Sync;
type GradFn = dyn Fn([f64; 2], [f64; 2]) -> [f64; 2] + Send + Sync;

/// `F` from a pair of closures.
pub struct FnNonlinearity {
    label: String,
    value: Box<ValueFn>,
    gradient: Box<GradFn>,
}

impl FnNonlinearity {
    pub fn new(
        label: impl Into<String>,
        value: impl Fn([f64; 2], [f64; 2]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn([f64; 2], [f64; 2]) -> [f64; 2] + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            value: Box::new(value),
            gradient: Box::new(gradient),
        }
    }
}

impl Nonlinearity for FnNonlinearity {
    fn value(&self, x: [f64; 2], z: [f64; 2]) -> f64 {
        (self.value)(x, z)
    }

    fn gradient(&self, x: [f64; 2], z: [f64; 2]) -> [f64; 2] {
        (self.gradient)(x, z)
    }

    fn describe(&self) -> String {
        self.label.clone()
    }
}

/// Central finite-difference Hessian of `F(x, ·)` at `z`, symmetrized.
pub fn fd_hessian(f: &dyn Nonlinearity, x: [f64; 2], z: [f64; 2]) -> Matrix2<f64> {
    let eps = 1e-5 * (1.0 + z[0].abs().max(z[1].abs()));
    let mut h = Matrix2::zeros();
    for j in 0..2 {
        let mut zp = z;
        let mut zm = z;
        zp[j] += eps;
        zm[j] -= eps;
        let (gp, gm) = (f.gradient(x, zp), f.gradient(x, zm));
        for i in 0..2 {
            h[(i, j)] = (gp[i] - gm[i]) / (2.0 * eps);
        }
    }
    (h + h.transpose()) * 0.5
}

/// Origin weight of an arbitrary potential as its Hessian at `z = 0`.
pub fn hessian_at_origin(f: Arc<dyn Nonlinearity>) -> MatrixField {
    MatrixField::from_fn(FieldRole::A0, "finite-difference Hessian at 0", move |x| {
        fd_hessian(f.as_ref(), x, [0.0, 0.0])
    })
}

/// Central finite-difference gradient of `F(x, ·)` with step `eps`.
pub fn fd_gradient(f: &dyn Nonlinearity, x: [f64; 2], z: [f64; 2], eps: f64) -> [f64; 2] {
    let mut g = [0.0; 2];
    for (j, gj) in g.iter_mut().enumerate() {
        let mut zp = z;
        let mut zm = z;
        zp[j] += eps;
        zm[j] -= eps;
        *gj = (f.value(x, zp) - f.value(x, zm)) / (2.0 * eps);
    }
    g
}

/// Rejects models whose fields or constants are unusable.
pub fn validate_model(model: &NonlinearityModel) -> Result<()> {
    if model.lambda.is_nan() || model.lambda < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "growth constant must be nonnegative, got {}",
            model.lambda
        )));
    }
    if !(model.delta0 > 0.0) {
        return Err(Error::InvalidArgument("origin radius must be positive".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_derivatives_match_finite_differences() {
        let p = LogQuartic { c: 1.0, a: 3.47, q: 4.0 };
        for &s in &[0.0, 1e-3, 0.3, 1.0, 7.0, 1e3] {
            let e = 1e-6 * (1.0 + s);
            let d = (p.value(s + e) - p.value((s - e).max(0.0))) / (s + e - (s - e).max(0.0));
            assert!((d - p.derivative(s)).abs() <= 1e-6 * (1.0 + d.abs()), "P' at {s}");
            let d2 = (p.derivative(s + e) - p.derivative((s - e).max(0.0))) / (s + e - (s - e).max(0.0));
            assert!((d2 - p.second_derivative(s)).abs() <= 1e-5 * (1.0 + d2.abs()), "P'' at {s}");
        }
    }

    #[test]
    fn plain_log_hessian_bounded_below_by_minus_two() {
        let p = LogQuartic { c: 1.0, a: 0.0, q: 0.0 };
        let (lo, hi) = p.hessian_range();
        assert!((lo + 2.0).abs() < 1e-6);
        assert!(hi <= 0.25 + 1e-6);
    }

    #[test]
    fn hessian_range_brackets_sampled_hessians() {
        let p = LogQuartic { c: 1.0, a: 3.47, q: 4.0 };
        let (lo, hi) = p.hessian_range();
        let f = RadialPerturbation {
            ainf: MatrixField::constant(FieldRole::Ainf, Matrix2::zeros()),
            profile: p,
        };
        for i in 0..200 {
            let r = 10f64.powf(-3.0 + 6.0 * i as f64 / 200.0);
            let th = i as f64 * 0.37;
            let h = fd_hessian(&f, [0.5, 0.0], [r * th.cos(), r * th.sin()]);
            let [a, b] = crate::problem::sym2_eigenvalues(&h);
            assert!(a >= lo - 1e-4 && b <= hi + 1e-4);
        }
    }

    #[test]
    fn origin_weight_is_the_hessian() {
        let ainf = MatrixField::diag(FieldRole::Ainf, 3.0, 1.0);
        let model = NonlinearityModel::log_quartic(ainf, 1.0, 2.5, 4.0, 3.0);
        let h = hessian_at_origin(model.potential.clone());
        let diff = h.at([0.3, 0.0]) - model.a0.at([0.3, 0.0]);
        assert!(diff.amax() < 1e-6);
        assert_eq!(model.a0.at([0.0, 0.0]), Matrix2::new(6.0, 0.0, 0.0, 4.0));
    }

    #[test]
    fn sign_tags_follow_coefficients() {
        let id = MatrixField::identity(FieldRole::Ainf);
        let m = NonlinearityModel::log_quartic(id.clone(), 1.0, 3.47, 4.0, 1.0);
        assert_eq!(m.origin_sign, Some(Sign::Plus));
        assert_eq!(m.infinity_sign, Some(Sign::Minus));
        assert!(m.delta0 > 0.0);
        let flipped = NonlinearityModel::log_quartic(id, -1.0, 0.0, -1.0, 1.0);
        assert_eq!(flipped.infinity_sign, Some(Sign::Plus));
        assert_eq!(flipped.origin_sign, Some(Sign::Minus));
    }

    #[test]
    fn expression_potential_gradient() {
        let f = ExprNonlinearity::parse("0.5*(u*u + v*v) - ln(1 + u*u + v*v)").unwrap();
        let z = [0.7, -0.2];
        let g = f.gradient([0.0, 0.0], z);
        let fd = fd_gradient(&f, [0.0, 0.0], z, 1e-6);
        assert!((g[0] - fd[0]).abs() < 1e-8 && (g[1] - fd[1]).abs() < 1e-8);
    }
}
