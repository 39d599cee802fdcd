//! Saddle point reduction: for each `v ∈ X⁻` the fiber problem over `X⁺` is
//! solved for its unique critical point `ψ(v)`, giving the reduced functional
//! `φ(v) = f(v + ψ(v))` with gradient `P⁻∇f(v + ψ(v))`.
//!
//! Everything is expressed in coordinates of orthonormal bases of `X⁻` and
//! `X⁺`, so Euclidean coordinate norms are the norms of the underlying space.

use std::cell::RefCell;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::FunctionalHandle;
use crate::homology::ModelFunctional;
use crate::spectral::{SpectralSplit, SplitSide};

/// A functional on `X = X⁻ ⊕ X⁺` accessed through split coordinates.
///
/// A full point is an opaque vector produced by [`SplitFunctional::compose`].
pub trait SplitFunctional: Send + Sync {
    fn minus_dim(&self) -> usize;
    fn plus_dim(&self) -> usize;
    fn side(&self) -> SplitSide;
    /// Full point of `v ∈ X⁻`.
    fn lift_minus(&self, v: &DVector<f64>) -> DVector<f64>;
    /// `base + w` for `w ∈ X⁺`.
    fn add_plus(&self, base: &DVector<f64>, w: &DVector<f64>) -> DVector<f64>;
    fn value_at(&self, z: &DVector<f64>) -> f64;
    /// `X⁺` coordinates of the gradient.
    fn plus_gradient_at(&self, z: &DVector<f64>) -> DVector<f64>;
    /// `X⁻` coordinates of the gradient.
    fn minus_gradient_at(&self, z: &DVector<f64>) -> DVector<f64>;
    /// Norm of the full gradient, computed without the split.
    fn residual_at(&self, z: &DVector<f64>) -> f64;
    /// Distance between two full points.
    fn distance(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64;
}

/// The discretized energy split along weighted eigenspaces.
#[derive(Debug, Clone)]
pub struct PdeSplitFunctional {
    functional: FunctionalHandle,
    split: SpectralSplit,
    minus_t: DMatrix<f64>,
    plus_t: DMatrix<f64>,
}

impl PdeSplitFunctional {
    pub fn new(functional: FunctionalHandle, split: SpectralSplit) -> Result<Self> {
        if split.minus_basis().nrows() != functional.dim() {
            return Err(Error::DomainMismatch {
                expected: functional.dim(),
                actual: split.minus_basis().nrows(),
            });
        }
        if split.minus_dim() + split.plus_dim() != functional.dim() {
            return Err(Error::InvalidArgument(
                "split bases must span the whole discrete space".into(),
            ));
        }
        let w = functional.grid().quadrature_weight();
        let minus_t = split.minus_basis().transpose() * w;
        let plus_t = split.plus_basis().transpose() * w;
        Ok(Self {
            functional,
            split,
            minus_t,
            plus_t,
        })
    }

    pub fn functional(&self) -> &FunctionalHandle {
        &self.functional
    }

    pub fn split(&self) -> &SpectralSplit {
        &self.split
    }

    /// Split coordinates `(v, w)` of a field vector.
    pub fn coordinates(&self, z: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let lz = self.functional.apply_laplacian(z);
        (&self.minus_t * &lz, &self.plus_t * &lz)
    }

    /// Discrete `|z|₂²`.
    pub fn l2_norm_sq(&self, z: &DVector<f64>) -> f64 {
        self.functional.grid().quadrature_weight() * z.norm_squared()
    }
}

impl SplitFunctional for PdeSplitFunctional {
    fn minus_dim(&self) -> usize {
        self.split.minus_dim()
    }

    fn plus_dim(&self) -> usize {
        self.split.plus_dim()
    }

    fn side(&self) -> SplitSide {
        self.split.side()
    }

    fn lift_minus(&self, v: &DVector<f64>) -> DVector<f64> {
        self.split.minus_basis() * v
    }

    fn add_plus(&self, base: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        base + self.split.plus_basis() * w
    }

    fn value_at(&self, z: &DVector<f64>) -> f64 {
        self.functional.value(z)
    }

    // With orthonormal bases the coordinates of ∇Φ = z − L⁻¹g are
    // (coordinates of z) − h^n Eᵀ g.
    fn plus_gradient_at(&self, z: &DVector<f64>) -> DVector<f64> {
        let lz = self.functional.apply_laplacian(z);
        &self.plus_t * (lz - self.functional.load(z))
    }

    fn minus_gradient_at(&self, z: &DVector<f64>) -> DVector<f64> {
        let lz = self.functional.apply_laplacian(z);
        &self.minus_t * (lz - self.functional.load(z))
    }

    fn residual_at(&self, z: &DVector<f64>) -> f64 {
        self.functional.h10_norm(&self.functional.gradient(z))
    }

    fn distance(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        self.functional.h10_norm(&(a - b))
    }
}

/// A model functional on `Rⁿ` split along coordinate axes.
#[derive(Debug, Clone)]
pub struct ModelSplitFunctional {
    model: ModelFunctional,
    minus: Vec<usize>,
    plus: Vec<usize>,
    side: SplitSide,
}

impl ModelSplitFunctional {
    pub fn new(model: ModelFunctional, minus: Vec<usize>, plus: Vec<usize>, side: SplitSide) -> Result<Self> {
        let n = model.dim();
        let mut seen = vec![false; n];
        for &i in minus.iter().chain(&plus) {
            if i >= n || seen[i] {
                return Err(Error::InvalidArgument(format!(
                    "split indices must partition 0..{n}"
                )));
            }
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidArgument(format!("split indices must partition 0..{n}")));
        }
        Ok(Self { model, minus, plus, side })
    }

    /// Uses the split stored on the model.
    pub fn from_model(model: ModelFunctional) -> Result<Self> {
        let split = model
            .split()
            .cloned()
            .ok_or_else(|| Error::InvalidArgument(format!("model `{}` has no split", model.id())))?;
        Self::new(model, split.minus, split.plus, split.side)
    }

    pub fn model(&self) -> &ModelFunctional {
        &self.model
    }

    pub fn minus_indices(&self) -> &[usize] {
        &self.minus
    }

    pub fn plus_indices(&self) -> &[usize] {
        &self.plus
    }

    fn pick(&self, g: &[f64], idx: &[usize]) -> DVector<f64> {
        DVector::from_iterator(idx.len(), idx.iter().map(|&i| g[i]))
    }
}

impl SplitFunctional for ModelSplitFunctional {
    fn minus_dim(&self) -> usize {
        self.minus.len()
    }

    fn plus_dim(&self) -> usize {
        self.plus.len()
    }

    fn side(&self) -> SplitSide {
        self.side
    }

    fn lift_minus(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut z = DVector::zeros(self.model.dim());
        for (k, &i) in self.minus.iter().enumerate() {
            z[i] = v[k];
        }
        z
    }

    fn add_plus(&self, base: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        let mut z = base.clone();
        for (k, &i) in self.plus.iter().enumerate() {
            z[i] += w[k];
        }
        z
    }

    fn value_at(&self, z: &DVector<f64>) -> f64 {
        self.model.value(z.as_slice())
    }

    fn plus_gradient_at(&self, z: &DVector<f64>) -> DVector<f64> {
        self.pick(&self.model.gradient(z.as_slice()), &self.plus)
    }

    fn minus_gradient_at(&self, z: &DVector<f64>) -> DVector<f64> {
        self.pick(&self.model.gradient(z.as_slice()), &self.minus)
    }

    fn residual_at(&self, z: &DVector<f64>) -> f64 {
        self.model.gradient(z.as_slice()).iter().map(|g| g * g).sum::<f64>().sqrt()
    }

    fn distance(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        (a - b).norm()
    }
}

/// Sample counts and radii for the sampling-based diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSampler {
    pub samples: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub seed: u64,
}

impl Default for PairSampler {
    fn default() -> Self {
        Self {
            samples: 200,
            r_min: 1e-2,
            r_max: 1e2,
            seed: 0,
        }
    }
}

impl PairSampler {
    fn random_vector(&self, rng: &mut ChaCha8Rng, dim: usize) -> DVector<f64> {
        if dim == 0 {
            return DVector::zeros(0);
        }
        let d = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = d.norm();
        let (lo, hi) = (self.r_min.ln(), self.r_max.ln());
        let r = rng.gen_range(lo..=hi).exp();
        d * (r / n)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionReport {
    pub holds: bool,
    /// Smallest sampled monotonicity ratio; `None` when `X⁺` is trivial.
    pub kappa_est: Option<f64>,
    pub samples: usize,
    /// `(v, w₁, w₂)` achieving the smallest ratio when the condition fails.
    pub witness: Option<(Vec<f64>, Vec<f64>, Vec<f64>)>,
}

/// Samples `∓⟨∇f(v+w₁) − ∇f(v+w₂), w₁ − w₂⟩ / ‖w₁ − w₂‖²` over random triples.
pub fn verify_condition<S: SplitFunctional + ?Sized>(system: &S, sampler: &PairSampler) -> ConditionReport {
    if system.plus_dim() == 0 {
        return ConditionReport {
            holds: true,
            kappa_est: None,
            samples: 0,
            witness: None,
        };
    }
    let sign = system.side().sign();
    let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed);
    let mut kappa = f64::INFINITY;
    let mut witness = None;
    for _ in 0..sampler.samples {
        let v = sampler.random_vector(&mut rng, system.minus_dim());
        let w1 = sampler.random_vector(&mut rng, system.plus_dim());
        let w2 = if rng.gen_bool(0.5) {
            &w1 + sampler.random_vector(&mut rng, system.plus_dim()) * 1e-2
        } else {
            sampler.random_vector(&mut rng, system.plus_dim())
        };
        let base = system.lift_minus(&v);
        let g1 = system.plus_gradient_at(&system.add_plus(&base, &w1));
        let g2 = system.plus_gradient_at(&system.add_plus(&base, &w2));
        let dw = &w1 - &w2;
        let ratio = sign * (g1 - g2).dot(&dw) / dw.norm_squared();
        if ratio < kappa {
            kappa = ratio;
            witness = Some((v.as_slice().to_vec(), w1.as_slice().to_vec(), w2.as_slice().to_vec()));
        }
    }
    let holds = kappa > 0.0;
    ConditionReport {
        holds,
        kappa_est: Some(kappa),
        samples: sampler.samples,
        witness: if holds { None } else { witness },
    }
}

pub const DEFAULT_INNER_TOL: f64 = 1e-10;
pub const DEFAULT_INNER_MAX_ITER: usize = 200;
/// Largest fiber dimension solved by Newton's method.
pub const NEWTON_MAX_DIM: usize = 64;

/// Reduction state around a split functional with a warm-start cache.
///
/// The cache makes the handle `!Sync`; clone one handle per thread.
#[derive(Debug)]
pub struct ReductionHandle<S> {
    system: Arc<S>,
    kappa: f64,
    inner_tol: f64,
    inner_max_iter: usize,
    psi_cache: RefCell<Option<(DVector<f64>, DVector<f64>)>>,
}

impl<S> Clone for ReductionHandle<S> {
    fn clone(&self) -> Self {
        Self {
            system: self.system.clone(),
            kappa: self.kappa,
            inner_tol: self.inner_tol,
            inner_max_iter: self.inner_max_iter,
            psi_cache: RefCell::new(self.psi_cache.borrow().clone()),
        }
    }
}

/// `ψ(v)` together with the reduced value and gradient at `v`.
#[derive(Debug, Clone)]
pub struct ReducedPoint {
    pub psi: DVector<f64>,
    pub full: DVector<f64>,
    pub value: f64,
    pub gradient: DVector<f64>,
}

impl<S: SplitFunctional> ReductionHandle<S> {
    /// `kappa` is the verified monotonicity constant; it scales the fallback
    /// step of the fiber solver.
    pub fn new(system: S, kappa: f64) -> Result<Self> {
        Self::from_arc(Arc::new(system), kappa)
    }

    pub fn from_arc(system: Arc<S>, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "monotonicity constant must be positive, got {kappa}"
            )));
        }
        Ok(Self {
            system,
            kappa,
            inner_tol: DEFAULT_INNER_TOL,
            inner_max_iter: DEFAULT_INNER_MAX_ITER,
            psi_cache: RefCell::new(None),
        })
    }

    pub fn with_inner_tolerance(mut self, tol: f64, max_iter: usize) -> Self {
        self.inner_tol = tol;
        self.inner_max_iter = max_iter;
        self
    }

    pub fn system(&self) -> &S {
        &self.system
    }

    pub fn shared_system(&self) -> Arc<S> {
        self.system.clone()
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn inner_tol(&self) -> f64 {
        self.inner_tol
    }

    pub fn inner_max_iter(&self) -> usize {
        self.inner_max_iter
    }

    pub fn mu(&self) -> usize {
        match self.system.side() {
            SplitSide::AMinusCase => self.system.plus_dim(),
            SplitSide::APlusCase => self.system.minus_dim(),
        }
    }

    pub fn clear_cache(&self) {
        self.psi_cache.replace(None);
    }

    /// `ψ(v)`, warm-started from the most recent solve.
    pub fn solve_psi(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        let start = match &*self.psi_cache.borrow() {
            Some((_, w)) if w.len() == self.system.plus_dim() => w.clone(),
            _ => DVector::zeros(self.system.plus_dim()),
        };
        let w = self.solve_psi_from(v, &start)?;
        self.psi_cache.replace(Some((v.clone(), w.clone())));
        Ok(w)
    }

    /// `ψ(v)` from an explicit starting point, leaving the cache untouched.
    pub fn solve_psi_from(&self, v: &DVector<f64>, start: &DVector<f64>) -> Result<DVector<f64>> {
        let base = self.system.lift_minus(v);
        if self.system.plus_dim() == 0 {
            return Ok(DVector::zeros(0));
        }
        let fiber = Fiber {
            system: &*self.system,
            base: &base,
            sign: self.system.side().sign(),
        };
        if self.system.plus_dim() <= NEWTON_MAX_DIM {
            fiber.newton(start.clone(), self.inner_tol, self.inner_max_iter, self.kappa)
        } else {
            fiber.barzilai_borwein(start.clone(), self.inner_tol, self.inner_max_iter)
        }
    }

    pub fn reduce(&self, v: &DVector<f64>) -> Result<ReducedPoint> {
        let psi = self.solve_psi(v)?;
        let full = self.system.add_plus(&self.system.lift_minus(v), &psi);
        Ok(ReducedPoint {
            value: self.system.value_at(&full),
            gradient: self.system.minus_gradient_at(&full),
            psi,
            full,
        })
    }

    /// `φ(v) = f(v + ψ(v))`.
    pub fn reduced_value(&self, v: &DVector<f64>) -> Result<f64> {
        Ok(self.reduce(v)?.value)
    }

    /// `∇φ(v) = P⁻∇f(v + ψ(v))`.
    pub fn reduced_gradient(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.reduce(v)?.gradient)
    }

    /// `f` restricted to `X⁻`.
    pub fn restricted_value(&self, v: &DVector<f64>) -> f64 {
        self.system.value_at(&self.system.lift_minus(v))
    }

    /// Largest sampled `‖ψ(v₁) − ψ(v₂)‖ / ‖v₁ − v₂‖`; observational only.
    pub fn psi_lipschitz(&self, sampler: &PairSampler) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed);
        let mut worst: f64 = 0.0;
        for _ in 0..sampler.samples {
            let v1 = sampler.random_vector(&mut rng, self.system.minus_dim());
            let dv = sampler.random_vector(&mut rng, self.system.minus_dim()) * 1e-2;
            let v2 = &v1 + &dv;
            let p1 = self.solve_psi(&v1)?;
            let p2 = self.solve_psi(&v2)?;
            if dv.norm() > 0.0 {
                worst = worst.max((p1 - p2).norm() / dv.norm());
            }
        }
        Ok(worst)
    }

    /// Largest sampled `‖v − ∇φ(v)‖` over `‖v‖ ≤ radius`.
    pub fn reduced_compact_bound(&self, radius: f64, samples: usize, seed: u64) -> Result<f64> {
        let sampler = PairSampler {
            samples,
            r_min: radius * 1e-3,
            r_max: radius,
            seed,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sup: f64 = 0.0;
        for _ in 0..samples {
            let v = sampler.random_vector(&mut rng, self.system.minus_dim());
            let g = self.reduced_gradient(&v)?;
            sup = sup.max((v - g).norm());
        }
        Ok(sup)
    }
}

/// The fiber objective `J(w) = s · f(base + w)`, minimized over `w`.
struct Fiber<'a, S: SplitFunctional + ?Sized> {
    system: &'a S,
    base: &'a DVector<f64>,
    sign: f64,
}

impl<S: SplitFunctional + ?Sized> Fiber<'_, S> {
    fn value(&self, w: &DVector<f64>) -> f64 {
        self.sign * self.system.value_at(&self.system.add_plus(self.base, w))
    }

    fn gradient(&self, w: &DVector<f64>) -> DVector<f64> {
        self.system.plus_gradient_at(&self.system.add_plus(self.base, w)) * self.sign
    }

    fn hessian(&self, w: &DVector<f64>) -> DMatrix<f64> {
        let n = w.len();
        let eps = 1e-5 * w.amax().max(1.0);
        let mut h = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[j] += eps;
            wm[j] -= eps;
            let col = (self.gradient(&wp) - self.gradient(&wm)) / (2.0 * eps);
            h.set_column(j, &col);
        }
        (&h + h.transpose()) * 0.5
    }

    /// Step acceptance: sufficient decrease, or a smaller gradient once
    /// values stagnate at rounding level.
    fn accept(&self, j0: f64, g0: f64, slope: f64, t: f64, w: &DVector<f64>) -> Option<(f64, DVector<f64>)> {
        let j = self.value(w);
        let g = self.gradient(w);
        let armijo = j <= j0 + 1e-4 * t * slope;
        if (armijo && j.is_finite()) || g.norm() < g0 {
            Some((j, g))
        } else {
            None
        }
    }

    fn newton(&self, mut w: DVector<f64>, tol: f64, max_iter: usize, kappa: f64) -> Result<DVector<f64>> {
        let mut j = self.value(&w);
        let mut g = self.gradient(&w);
        for _ in 0..max_iter {
            let gn = g.norm();
            if gn <= tol {
                return Ok(w);
            }
            let h = self.hessian(&w);
            let mut d = match h.clone().cholesky() {
                Some(c) => -c.solve(&g),
                None => -&g / kappa,
            };
            if d.dot(&g) >= 0.0 {
                d = -&g / kappa;
            }
            let slope = d.dot(&g);
            let mut t = 1.0;
            let mut moved = false;
            for _ in 0..40 {
                let trial = &w + &d * t;
                if let Some((jt, gt)) = self.accept(j, gn, slope, t, &trial) {
                    w = trial;
                    j = jt;
                    g = gt;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if !moved {
                break;
            }
        }
        let residual = g.norm();
        if residual <= tol {
            Ok(w)
        } else {
            Err(Error::InnerSolveFailed {
                iterations: max_iter,
                residual,
            })
        }
    }

    fn barzilai_borwein(&self, mut w: DVector<f64>, tol: f64, max_iter: usize) -> Result<DVector<f64>> {
        let mut j = self.value(&w);
        let mut g = self.gradient(&w);
        let mut alpha = 1.0;
        for _ in 0..max_iter {
            let gn = g.norm();
            if gn <= tol {
                return Ok(w);
            }
            let mut t = alpha;
            let mut next = None;
            for _ in 0..40 {
                let trial = &w - &g * t;
                if let Some((jt, gt)) = self.accept(j, gn, -t * gn * gn, 1.0, &trial) {
                    next = Some((trial, jt, gt));
                    break;
                }
                t *= 0.5;
            }
            let Some((wn, jn, gn_vec)) = next else { break };
            let s = &wn - &w;
            let y = &gn_vec - &g;
            let sy = s.dot(&y);
            alpha = if sy > 0.0 { s.norm_squared() / sy } else { 1.0 };
            w = wn;
            j = jn;
            g = gn_vec;
        }
        let residual = g.norm();
        if residual <= tol {
            Ok(w)
        } else {
            Err(Error::InnerSolveFailed {
                iterations: max_iter,
                residual,
            })
        }
    }
}

/// One row of the coercivity table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoercivityRow {
    pub radius: f64,
    pub min_restricted: f64,
    pub min_reduced: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoercivityReport {
    pub rows: Vec<CoercivityRow>,
    /// The minimum over rays grows along the tail of the radius schedule.
    pub growth_monotone: bool,
    /// Every sublevel sample satisfies the non-vanishing bound.
    pub non_vanishing_holds: bool,
    pub non_vanishing_worst_slack: f64,
    /// `φ ≥ f|_{X⁻}` at every sample.
    pub reduced_dominates: bool,
    pub sampled_min_reduced: f64,
    /// `−M |Ω|`, when the constant of the infinity condition is supplied.
    pub analytic_lower_bound: Option<f64>,
}

/// Evaluates `Φ₁ = Φ|_{X⁻}` and `φ` along random rays in `X⁻`.
///
/// `level` selects the sublevel samples for the non-vanishing bound
/// `|v/‖v‖|₂² ≥ Λ⁻¹ (1 − 2Φ₁(v)/‖v‖²)`.
pub fn coercivity_diagnostic(
    handle: &ReductionHandle<PdeSplitFunctional>,
    ray_count: usize,
    radii: &[f64],
    level: f64,
    infinity_bound: Option<f64>,
    seed: u64,
) -> Result<CoercivityReport> {
    let system = handle.system();
    let lambda = system.functional().model().lambda;
    let measure = system.functional().grid().measure();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = system.minus_dim();
    let rays: Vec<DVector<f64>> = (0..ray_count)
        .map(|_| {
            let d = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
            let n = d.norm();
            d / n
        })
        .collect();
    let mut rows = Vec::with_capacity(radii.len());
    let mut worst_slack = f64::INFINITY;
    let mut dominates = true;
    let mut sampled_min = f64::INFINITY;
    for &r in radii {
        let mut min_restricted = f64::INFINITY;
        let mut min_reduced = f64::INFINITY;
        handle.clear_cache();
        for ray in &rays {
            let v = ray * r;
            let restricted = handle.restricted_value(&v);
            let reduced = handle.reduced_value(&v)?;
            min_restricted = min_restricted.min(restricted);
            min_reduced = min_reduced.min(reduced);
            sampled_min = sampled_min.min(reduced);
            let sign = system.side().sign();
            if -sign * (reduced - restricted) < -1e-9 * (1.0 + restricted.abs()) {
                dominates = false;
            }
            if restricted <= level && lambda > 0.0 {
                let z = system.lift_minus(&v);
                let unit_l2 = system.l2_norm_sq(&z) / (r * r);
                let bound = (1.0 - 2.0 * restricted / (r * r)) / lambda;
                worst_slack = worst_slack.min(unit_l2 - bound);
            }
        }
        rows.push(CoercivityRow {
            radius: r,
            min_restricted,
            min_reduced,
        });
    }
    let tail_start = rows.len() / 2;
    let growth_monotone = rows.len() >= 2
        && rows[tail_start..].windows(2).all(|w| w[1].min_restricted >= w[0].min_restricted)
        && rows.last().map(|r| r.min_restricted) > rows.first().map(|r| r.min_restricted);
    let non_vanishing_holds = worst_slack >= -1e-9;
    Ok(CoercivityReport {
        rows,
        growth_monotone,
        non_vanishing_holds,
        non_vanishing_worst_slack: if worst_slack.is_finite() { worst_slack } else { 0.0 },
        reduced_dominates: dominates,
        sampled_min_reduced: sampled_min,
        analytic_lower_bound: infinity_bound.map(|m| -m * measure),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridDomain;
    use crate::problem::{FieldRole, MatrixField, NonlinearityModel};
    use crate::spectral::{build_split, normalize_resonance, solve_weighted_eigenproblem};

    fn quadratic_model(a: f64, b: f64) -> ModelFunctional {
        // f(v, w) = ½ a v² − ½ w² + b v w
        ModelFunctional::new(
            "quadratic saddle",
            2,
            move |z| 0.5 * a * z[0] * z[0] - 0.5 * z[1] * z[1] + b * z[0] * z[1],
            move |z| vec![a * z[0] + b * z[1], -z[1] + b * z[0]],
        )
    }

    fn model_handle(m: ModelFunctional) -> ReductionHandle<ModelSplitFunctional> {
        let s = ModelSplitFunctional::new(m, vec![0], vec![1], SplitSide::AMinusCase).unwrap();
        ReductionHandle::new(s, 1.0).unwrap()
    }

    #[test]
    fn quadratic_condition_has_unit_kappa() {
        let s = ModelSplitFunctional::new(quadratic_model(2.0, 0.0), vec![0], vec![1], SplitSide::AMinusCase).unwrap();
        let r = verify_condition(&s, &PairSampler::default());
        assert!(r.holds);
        assert!((r.kappa_est.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wrong_sign_fails_with_witness() {
        let m = ModelFunctional::new("convex fiber", 2, |z| z[0] * z[0] + 0.5 * z[1] * z[1], |z| vec![2.0 * z[0], z[1]]);
        let s = ModelSplitFunctional::new(m, vec![0], vec![1], SplitSide::AMinusCase).unwrap();
        let r = verify_condition(&s, &PairSampler::default());
        assert!(!r.holds);
        assert!(r.witness.is_some());
    }

    #[test]
    fn psi_of_quadratic_saddle_is_linear() {
        let h = model_handle(quadratic_model(1.0, 0.7));
        for &v in &[-2.0, 0.0, 0.3, 5.0] {
            let v = DVector::from_element(1, v);
            let psi = h.solve_psi(&v).unwrap();
            assert!((psi[0] - 0.7 * v[0]).abs() < 1e-10);
            // φ(v) = ½ a v² + ½ b² v²
            let phi = h.reduced_value(&v).unwrap();
            assert!((phi - 0.5 * (1.0 + 0.49) * v[0] * v[0]).abs() < 1e-10);
        }
    }

    fn log_handle(n: usize) -> ReductionHandle<PdeSplitFunctional> {
        let g = GridDomain::unit_interval(n).unwrap();
        let (ainf, _) = normalize_resonance(&MatrixField::diag(FieldRole::Ainf, 3.5, 1.0), 2, &g).unwrap();
        let norm = ainf.sup_norm(&g);
        let mut model = NonlinearityModel::log_quartic(ainf.clone(), 1.0, 0.0, 0.0, norm);
        model.k = 2;
        let s = solve_weighted_eigenproblem(&g, &ainf, g.field_len()).unwrap();
        let split = build_split(&s, 2, SplitSide::AMinusCase).unwrap();
        let f = FunctionalHandle::new(g, model).unwrap();
        let system = PdeSplitFunctional::new(f, split).unwrap();
        let kappa = verify_condition(&system, &PairSampler { samples: 50, ..PairSampler::default() })
            .kappa_est
            .unwrap();
        ReductionHandle::new(system, kappa).unwrap()
    }

    #[test]
    fn log_perturbation_fiber_solves_and_agrees_across_starts() {
        let h = log_handle(15);
        assert!(h.kappa() > 0.0);
        let zero = DVector::zeros(h.system().minus_dim());
        assert!(h.solve_psi(&zero).unwrap().norm() < 1e-12);
        assert!(h.reduced_gradient(&zero).unwrap().norm() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let v = DVector::from_fn(h.system().minus_dim(), |_, _| rng.gen_range(-3.0..3.0));
            let a = h.solve_psi_from(&v, &DVector::zeros(h.system().plus_dim())).unwrap();
            let b = h.solve_psi_from(&v, &DVector::from_element(h.system().plus_dim(), 50.0)).unwrap();
            assert!((&a - &b).norm() <= 10.0 * h.inner_tol() / h.kappa());
            let full = h.system().add_plus(&h.system().lift_minus(&v), &a);
            assert!(h.system().plus_gradient_at(&full).norm() <= h.inner_tol());
        }
    }

    #[test]
    fn reduced_gradient_matches_finite_differences() {
        let h = log_handle(15);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let v = DVector::from_fn(h.system().minus_dim(), |_, _| rng.gen_range(-2.0..2.0));
            let d = DVector::from_fn(h.system().minus_dim(), |_, _| rng.gen_range(-1.0..1.0));
            let eps = 1e-5;
            let fd = (h.reduced_value(&(&v + &d * eps)).unwrap() - h.reduced_value(&(&v - &d * eps)).unwrap())
                / (2.0 * eps);
            let an = h.reduced_gradient(&v).unwrap().dot(&d);
            assert!((fd - an).abs() <= 1e-5 * an.abs().max(1.0), "{fd} vs {an}");
        }
    }

    #[test]
    fn coercivity_on_log_perturbation() {
        let h = log_handle(15);
        let radii = [1.0, 10.0, 100.0, 1000.0];
        let r = coercivity_diagnostic(&h, 8, &radii, 1e6, Some(0.0), 1).unwrap();
        assert!(r.reduced_dominates);
        assert!(r.non_vanishing_holds);
        assert!(r.growth_monotone);
        assert!(r.sampled_min_reduced >= r.analytic_lower_bound.unwrap() - 1e-9);
        assert!(h.psi_lipschitz(&PairSampler { samples: 10, ..PairSampler::default() }).unwrap().is_finite());
        assert!(h.reduced_compact_bound(10.0, 10, 2).unwrap().is_finite());
    }

    #[test]
    fn zero_potential_restricted_energy_is_quadratic() {
        let g = GridDomain::unit_interval(9).unwrap();
        let s = solve_weighted_eigenproblem(&g, &MatrixField::identity(FieldRole::Other), 18).unwrap();
        let split = build_split(&s, 1, SplitSide::AMinusCase).unwrap();
        let f = FunctionalHandle::new(g, NonlinearityModel::zero()).unwrap();
        let h = ReductionHandle::new(PdeSplitFunctional::new(f, split).unwrap(), 1.0).unwrap();
        let v = DVector::from_fn(18, |i, _| (i as f64).sin());
        assert!((h.restricted_value(&v) - 0.5 * v.norm_squared()).abs() < 1e-10 * v.norm_squared());
    }
}
