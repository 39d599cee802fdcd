//! Multi-start search for critical points of the reduced functional, Morse
//! indices, the local linking diagnostic and the multiplicity prediction.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::FunctionalHandle;
use crate::grid::{GridDomain, VectorField2};
use crate::problem::{fd_hessian, Sign};
use crate::reduction::{ReductionHandle, SplitFunctional};
use crate::spectral::{LinkingSplit, Spectrum};

/// Largest reduced dimension refined by Newton's method.
pub const NEWTON_MAX_DIM: usize = 512;

/// Start distribution and solver switches for [`find_critical_points`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchStrategy {
    pub starts: usize,
    /// Radii of the starts placed along leading basis directions of `X⁻`.
    pub eigen_radii: Vec<f64>,
    /// Number of leading directions used for eigen-direction starts.
    pub eigen_directions: usize,
    /// Log-uniform radius range of the random starts.
    pub random_radius: (f64, f64),
    pub deflation: bool,
    pub newton: bool,
    pub seed: u64,
    /// Full-space residual accepted as critical.
    pub tolerance: f64,
    /// Minimum distance between distinct records.
    pub separation: f64,
    /// Records with norm at most this are trivial.
    pub triviality: f64,
    pub descent_iterations: usize,
    pub newton_iterations: usize,
    /// Starts solved in parallel between deflation updates.
    pub batch: usize,
}

impl Default for SearchStrategy {
    fn default() -> Self {
        Self {
            starts: 200,
            eigen_radii: vec![0.1, 1.0, 10.0],
            eigen_directions: 4,
            random_radius: (0.1, 10.0),
            deflation: true,
            newton: true,
            seed: 0,
            tolerance: 1e-8,
            separation: 1e-3,
            triviality: 1e-6,
            descent_iterations: 300,
            newton_iterations: 40,
            batch: 32,
        }
    }
}

impl SearchStrategy {
    /// Starting points in `X⁻` coordinates with their provenance labels.
    pub fn start_points(&self, dim: usize) -> Vec<(DVector<f64>, String)> {
        let mut out = Vec::with_capacity(self.starts);
        'eigen: for i in 0..self.eigen_directions.min(dim) {
            for &r in &self.eigen_radii {
                for s in [1.0, -1.0] {
                    if out.len() >= self.starts / 2 {
                        break 'eigen;
                    }
                    let mut v = DVector::zeros(dim);
                    v[i] = s * r;
                    out.push((v, format!("eigen:{}:{:+}", i + 1, s * r)));
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let (lo, hi) = (self.random_radius.0.ln(), self.random_radius.1.ln());
        let mut k = 0;
        while out.len() < self.starts && dim > 0 {
            let d = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
            let r = if hi > lo { rng.gen_range(lo..hi).exp() } else { lo.exp() };
            let n = d.norm();
            out.push((d * (r / n), format!("random:{k}")));
            k += 1;
        }
        out
    }
}

/// A critical point of the full functional found through the reduction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointRecord {
    /// Full-space point `v + ψ(v)` as a flat array.
    pub point: Vec<f64>,
    /// `X⁻` coordinates `v`.
    pub reduced_point: Vec<f64>,
    pub value: f64,
    /// Full-space gradient norm.
    pub residual: f64,
    pub norm: f64,
    pub morse_index_reduced: usize,
    pub nullity_reduced: usize,
    pub trivial: bool,
    pub basin_seed: String,
}

impl CriticalPointRecord {
    /// The point as a vector field on `grid`.
    pub fn field(&self, grid: &GridDomain) -> Result<VectorField2> {
        VectorField2::from_vector(grid, DVector::from_column_slice(&self.point))
    }
}

/// One CSV summary row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordSummary {
    pub value: f64,
    pub residual: f64,
    pub norm: f64,
    pub index: usize,
    pub trivial: bool,
}

impl From<&CriticalPointRecord> for RecordSummary {
    fn from(r: &CriticalPointRecord) -> Self {
        Self {
            value: r.value,
            residual: r.residual,
            norm: r.norm,
            index: r.morse_index_reduced,
            trivial: r.trivial,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchDiagnostics {
    pub attempted: usize,
    pub converged: usize,
    pub duplicates: usize,
    pub deflation_rejections: usize,
    /// Failure reasons with counts.
    pub failures: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub records: Vec<CriticalPointRecord>,
    pub diagnostics: SearchDiagnostics,
}

impl SearchOutcome {
    pub fn nontrivial(&self) -> impl Iterator<Item = &CriticalPointRecord> {
        self.records.iter().filter(|r| !r.trivial)
    }
}

struct Candidate {
    v: DVector<f64>,
    z: DVector<f64>,
    value: f64,
    residual: f64,
}

/// `∇ log m` for the deflation factor `m(v) = Π (‖v − vᵢ‖⁻² + 1)`.
fn deflation_log_gradient(v: &DVector<f64>, deflated: &[DVector<f64>]) -> DVector<f64> {
    let mut g = DVector::zeros(v.len());
    for p in deflated {
        let d = v - p;
        let r2 = d.norm_squared().max(1e-300);
        let inv = 1.0 / r2;
        // d/dv log(r⁻² + 1) = −2 r⁻⁴ d / (r⁻² + 1)
        g -= d * (2.0 * inv * inv / (inv + 1.0));
    }
    g
}

struct Solver<'a, S: SplitFunctional> {
    handle: ReductionHandle<S>,
    strategy: &'a SearchStrategy,
    deflated: &'a [DVector<f64>],
}

impl<S: SplitFunctional> Solver<'_, S> {
    fn candidate(&self, v: &DVector<f64>) -> Result<Candidate> {
        let p = self.handle.reduce(v)?;
        Ok(Candidate {
            residual: self.handle.system().residual_at(&p.full),
            v: v.clone(),
            value: p.value,
            z: p.full,
        })
    }

    fn descend(&self, mut v: DVector<f64>) -> Result<DVector<f64>> {
        let mut p = self.handle.reduce(&v)?;
        let mut alpha = 1.0;
        for _ in 0..self.strategy.descent_iterations {
            let gn = p.gradient.norm();
            if gn <= 1e-3 * self.strategy.tolerance.sqrt() || v.norm() > 1e8 {
                break;
            }
            let mut t = alpha;
            let mut next = None;
            for _ in 0..40 {
                let trial = &v - &p.gradient * t;
                if let Ok(q) = self.handle.reduce(&trial) {
                    if q.value <= p.value - 1e-4 * t * gn * gn {
                        next = Some((trial, q));
                        break;
                    }
                }
                t *= 0.5;
            }
            let Some((vn, q)) = next else { break };
            let s = &vn - &v;
            let y = &q.gradient - &p.gradient;
            let sy = s.dot(&y);
            alpha = if sy > 0.0 { (s.norm_squared() / sy).clamp(1e-6, 1e6) } else { 1.0 };
            v = vn;
            p = q;
        }
        Ok(v)
    }

    fn jacobian(&self, v: &DVector<f64>, g: &DVector<f64>) -> Result<DMatrix<f64>> {
        let n = v.len();
        let eps = 1e-7 * v.norm().max(1.0);
        let mut j = DMatrix::zeros(n, n);
        for c in 0..n {
            let mut vp = v.clone();
            vp[c] += eps;
            let gp = self.handle.reduced_gradient(&vp)?;
            j.set_column(c, &((gp - g) / eps));
        }
        Ok((&j + j.transpose()) * 0.5)
    }

    fn refine(&self, mut v: DVector<f64>) -> Result<DVector<f64>> {
        let mut g = self.handle.reduced_gradient(&v)?;
        let use_newton = self.strategy.newton && v.len() <= NEWTON_MAX_DIM;
        let deflate = self.strategy.deflation && !self.deflated.is_empty();
        for _ in 0..self.strategy.newton_iterations {
            let gn = g.norm();
            if self.candidate(&v)?.residual <= 0.1 * self.strategy.tolerance {
                break;
            }
            let mut step = if use_newton {
                let j = self.jacobian(&v, &g)?;
                j.svd(true, true)
                    .solve(&(-&g), 1e-12 * gn.max(1e-300))
                    .map_err(|e| Error::LinearSolve(e.to_string()))?
            } else {
                -&g
            };
            if deflate {
                let lg = deflation_log_gradient(&v, self.deflated);
                let denom = 1.0 - lg.dot(&step);
                if denom.abs() > 1e-12 {
                    step /= denom;
                }
            }
            let mut t = 1.0;
            let mut moved = false;
            for _ in 0..30 {
                let trial = &v + &step * t;
                if let Ok(gt) = self.handle.reduced_gradient(&trial) {
                    if gt.norm() < gn {
                        v = trial;
                        g = gt;
                        moved = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !moved {
                break;
            }
        }
        Ok(v)
    }

    fn run(&self, start: DVector<f64>) -> std::result::Result<Candidate, String> {
        let v = self.descend(start).map_err(|e| format!("descent: {}", short(&e)))?;
        let v = self.refine(v).map_err(|e| format!("refinement: {}", short(&e)))?;
        let c = self.candidate(&v).map_err(|e| format!("evaluation: {}", short(&e)))?;
        if !c.residual.is_finite() || c.residual > self.strategy.tolerance {
            return Err("residual above tolerance".into());
        }
        Ok(c)
    }
}

fn short(e: &Error) -> &'static str {
    match e {
        Error::InnerSolveFailed { .. } => "inner solve failed",
        Error::LinearSolve(_) => "linear solve failed",
        _ => "error",
    }
}

/// Symmetric finite-difference Hessian of `φ` at `v`.
fn reduced_hessian<S: SplitFunctional>(handle: &ReductionHandle<S>, v: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = v.len();
    let eps = 1e-5 * v.norm().max(1.0);
    let mut h = DMatrix::zeros(n, n);
    for c in 0..n {
        let mut vp = v.clone();
        let mut vm = v.clone();
        vp[c] += eps;
        vm[c] -= eps;
        let col = (handle.reduced_gradient(&vp)? - handle.reduced_gradient(&vm)?) / (2.0 * eps);
        h.set_column(c, &col);
    }
    Ok((&h + h.transpose()) * 0.5)
}

/// Negative and near-zero eigenvalue counts of the reduced Hessian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorseIndex {
    pub index: usize,
    pub nullity: usize,
}

pub const DEFAULT_INDEX_TOL: f64 = 1e-5;

/// Morse index of `φ` at a record's reduced point.
pub fn morse_index<S: SplitFunctional>(
    handle: &ReductionHandle<S>,
    record: &CriticalPointRecord,
    index_tol: f64,
) -> Result<MorseIndex> {
    let v = DVector::from_column_slice(&record.reduced_point);
    morse_index_at(handle, &v, index_tol)
}

fn morse_index_at<S: SplitFunctional>(handle: &ReductionHandle<S>, v: &DVector<f64>, tol: f64) -> Result<MorseIndex> {
    if v.is_empty() {
        return Ok(MorseIndex { index: 0, nullity: 0 });
    }
    let eig = reduced_hessian(handle, v)?.symmetric_eigenvalues();
    Ok(MorseIndex {
        index: eig.iter().filter(|&&l| l < -tol).count(),
        nullity: eig.iter().filter(|&&l| l.abs() <= tol).count(),
    })
}

/// Multi-start search for critical points of `φ`, lifted to the full space.
///
/// Starts run in parallel batches on fresh handle clones, so every start is
/// solved identically regardless of scheduling; records are merged in start
/// order and sorted by value, then norm.
pub fn find_critical_points<S: SplitFunctional>(
    handle: &ReductionHandle<S>,
    strategy: &SearchStrategy,
) -> Result<SearchOutcome> {
    let system = handle.system();
    let dim = system.minus_dim();
    let mut diagnostics = SearchDiagnostics::default();
    let mut accepted: Vec<Candidate> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    let mut deflated: Vec<DVector<f64>> = Vec::new();

    let zero = DVector::zeros(dim);
    let shared = handle.shared_system();
    let (kappa, inner_tol, inner_iter) = (handle.kappa(), handle.inner_tol(), handle.inner_max_iter());
    let fresh = || {
        ReductionHandle::from_arc(shared.clone(), kappa)
            .expect("kappa validated by the source handle")
            .with_inner_tolerance(inner_tol, inner_iter)
    };
    let trivial = Solver {
        handle: fresh(),
        strategy,
        deflated: &[],
    }
    .candidate(&zero)?;
    if trivial.residual <= strategy.tolerance {
        deflated.push(zero.clone());
        accepted.push(trivial);
        labels.push("trivial".into());
    } else {
        *diagnostics
            .failures
            .entry("origin is not critical".into())
            .or_default() += 1;
    }

    let starts = strategy.start_points(dim);
    diagnostics.attempted = starts.len();
    for chunk in starts.chunks(strategy.batch.max(1)) {
        let snapshot = deflated.clone();
        let results: Vec<std::result::Result<Candidate, String>> = chunk
            .par_iter()
            .map(|(start, _)| {
                Solver {
                    handle: fresh(),
                    strategy,
                    deflated: &snapshot,
                }
                .run(start.clone())
            })
            .collect();
        for ((_, label), res) in chunk.iter().zip(results) {
            match res {
                Err(reason) => *diagnostics.failures.entry(reason).or_default() += 1,
                Ok(c) => {
                    diagnostics.converged += 1;
                    let near = |p: &DVector<f64>| system.distance(&c.z, p) <= strategy.separation;
                    if strategy.deflation && snapshot.iter().any(|d| near(&full_of(handle, d))) {
                        diagnostics.deflation_rejections += 1;
                        continue;
                    }
                    if accepted.iter().any(|a| near(&a.z)) {
                        diagnostics.duplicates += 1;
                        continue;
                    }
                    if strategy.deflation {
                        deflated.push(c.v.clone());
                    }
                    accepted.push(c);
                    labels.push(label.clone());
                }
            }
        }
    }
    if accepted.is_empty() {
        return Err(Error::NoConvergentStarts {
            attempted: diagnostics.attempted,
            summary: format!("{:?}", diagnostics.failures),
        });
    }

    let origin = system.lift_minus(&zero);
    let mut records: Vec<CriticalPointRecord> = accepted
        .into_par_iter()
        .zip(labels)
        .map(|(c, label)| {
            let h = fresh();
            let idx = morse_index_at(&h, &c.v, DEFAULT_INDEX_TOL)?;
            let norm = system.distance(&c.z, &origin);
            Ok(CriticalPointRecord {
                point: c.z.as_slice().to_vec(),
                reduced_point: c.v.as_slice().to_vec(),
                value: c.value,
                residual: c.residual,
                norm,
                morse_index_reduced: idx.index,
                nullity_reduced: idx.nullity,
                trivial: norm <= strategy.triviality,
                basin_seed: label,
            })
        })
        .collect::<Result<_>>()?;
    records.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.norm.total_cmp(&b.norm)));
    Ok(SearchOutcome { records, diagnostics })
}

fn full_of<S: SplitFunctional>(handle: &ReductionHandle<S>, v: &DVector<f64>) -> DVector<f64> {
    let h = handle.clone();
    h.clear_cache();
    match h.reduce(v) {
        Ok(p) => p.full,
        Err(_) => handle.system().lift_minus(v),
    }
}

/// Newton's method on `∇Φ(z) = z − L⁻¹∇F(·, z)` in the full space, used to
/// cross-check records without the reduction.
pub fn full_space_newton(
    functional: &FunctionalHandle,
    start: &DVector<f64>,
    tolerance: f64,
    max_iter: usize,
) -> Result<(DVector<f64>, f64)> {
    let n = functional.grid().len();
    let nodes = functional.grid().nodes();
    let potential = functional.model().potential.clone();
    let mut z = start.clone();
    let mut g = functional.gradient(&z);
    let mut res = functional.h10_norm(&g);
    for _ in 0..max_iter {
        if res <= tolerance {
            break;
        }
        // Jacobian I − L_b⁻¹ D(z) with D the node-wise Hessian of F.
        let mut d = DMatrix::zeros(2 * n, 2 * n);
        for (i, x) in nodes.iter().enumerate() {
            let h = fd_hessian(potential.as_ref(), *x, [z[i], z[n + i]]);
            d[(i, i)] = h[(0, 0)];
            d[(i, n + i)] = h[(0, 1)];
            d[(n + i, i)] = h[(1, 0)];
            d[(n + i, n + i)] = h[(1, 1)];
        }
        let mut j = DMatrix::identity(2 * n, 2 * n);
        for c in 0..2 * n {
            let col = functional.solve_laplacian(&d.column(c).into_owned());
            j.set_column(c, &(j.column(c) - col));
        }
        let step = j
            .lu()
            .solve(&(-&g))
            .ok_or_else(|| Error::LinearSolve("singular Jacobian in full-space Newton".into()))?;
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..30 {
            let trial = &z + &step * t;
            let gt = functional.gradient(&trial);
            let rt = functional.h10_norm(&gt);
            if rt < res {
                z = trial;
                g = gt;
                res = rt;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Ok((z, res))
}

/// Direction counts for the local linking diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkingSampler {
    pub random_directions: usize,
    /// Leading basis vectors of each side tested individually.
    pub basis_directions: usize,
    pub seed: u64,
}

impl Default for LinkingSampler {
    fn default() -> Self {
        Self {
            random_directions: 64,
            basis_directions: 8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinkingRow {
    pub rho: f64,
    /// Largest sampled `Φ` on the non-positive side; `None` if that side is trivial.
    pub max_negative_side: Option<f64>,
    /// Smallest sampled `Φ` on the positive side.
    pub min_positive_side: Option<f64>,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinkingReport {
    pub holds: bool,
    /// Largest schedule radius below which every radius passed.
    pub rho: Option<f64>,
    pub negative_dim: usize,
    pub positive_dim: usize,
    pub rows: Vec<LinkingRow>,
    /// `(rho, side, value)` of the first failure.
    pub witness: Option<(f64, String, f64)>,
}

fn hstack(parts: &[&DMatrix<f64>], rows: usize) -> DMatrix<f64> {
    let cols: usize = parts.iter().map(|p| p.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut at = 0;
    for p in parts {
        out.columns_mut(at, p.ncols()).copy_from(p);
        at += p.ncols();
    }
    out
}

fn sphere_directions(basis: &DMatrix<f64>, sampler: &LinkingSampler, rng: &mut ChaCha8Rng) -> Vec<DVector<f64>> {
    let k = basis.ncols();
    if k == 0 {
        return Vec::new();
    }
    let mut dirs: Vec<DVector<f64>> = (0..sampler.basis_directions.min(k))
        .flat_map(|i| {
            let c = basis.column(i).into_owned();
            [c.clone(), -c]
        })
        .collect();
    for _ in 0..sampler.random_directions {
        let c = DVector::from_fn(k, |_, _| rng.sample::<f64, _>(StandardNormal));
        let c = &c / c.norm();
        dirs.push(basis * c);
    }
    dirs
}

/// Samples `Φ ≤ 0` on the negative side and `Φ > 0` on the positive side of
/// the splitting at the origin, on spheres of the given radii.
///
/// The kernel joins the negative side when the origin remainder is positive
/// and the positive side otherwise. Bases must be orthonormal in the energy
/// inner product.
pub fn local_linking_check(
    functional: &FunctionalHandle,
    split: &LinkingSplit,
    origin_sign: Sign,
    rho_schedule: &[f64],
    sampler: &LinkingSampler,
) -> LinkingReport {
    let rows_n = functional.dim();
    let (negative, positive) = match origin_sign {
        Sign::Plus => (hstack(&[&split.below, &split.kernel], rows_n), split.above.clone()),
        Sign::Minus => (split.below.clone(), hstack(&[&split.kernel, &split.above], rows_n)),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed);
    let neg_dirs = sphere_directions(&negative, sampler, &mut rng);
    let pos_dirs = sphere_directions(&positive, sampler, &mut rng);
    let mut schedule = rho_schedule.to_vec();
    schedule.sort_by(f64::total_cmp);
    let mut rows = Vec::with_capacity(schedule.len());
    let mut witness = None;
    for &rho in &schedule {
        let max_neg = neg_dirs
            .iter()
            .map(|d| functional.value(&(d * rho)))
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
        let min_pos = pos_dirs
            .iter()
            .map(|d| functional.value(&(d * rho)))
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))));
        let neg_ok = max_neg.is_none_or(|v| v <= 0.0);
        let pos_ok = min_pos.is_none_or(|v| v > 0.0);
        if witness.is_none() {
            if !neg_ok {
                witness = Some((rho, "negative".to_string(), max_neg.unwrap_or(0.0)));
            } else if !pos_ok {
                witness = Some((rho, "positive".to_string(), min_pos.unwrap_or(0.0)));
            }
        }
        rows.push(LinkingRow {
            rho,
            max_negative_side: max_neg,
            min_positive_side: min_pos,
            holds: neg_ok && pos_ok,
        });
    }
    let rho = rows.iter().take_while(|r| r.holds).last().map(|r| r.rho);
    LinkingReport {
        holds: rho.is_some(),
        rho,
        negative_dim: negative.ncols(),
        positive_dim: positive.ncols(),
        rows,
        witness,
    }
}

/// Theorem case selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremCase {
    St1I,
    St1Ii,
    St2I,
    St2Ii,
    None,
}

impl TheoremCase {
    /// Required sign of the remainder at the origin.
    pub fn origin_sign(self) -> Option<Sign> {
        match self {
            TheoremCase::St1I | TheoremCase::St2I => Some(Sign::Plus),
            TheoremCase::St1Ii | TheoremCase::St2Ii => Some(Sign::Minus),
            TheoremCase::None => None,
        }
    }

    /// Required sign of the remainder at infinity.
    pub fn infinity_sign(self) -> Option<Sign> {
        match self {
            TheoremCase::St1I | TheoremCase::St1Ii => Some(Sign::Plus),
            TheoremCase::St2I | TheoremCase::St2Ii => Some(Sign::Minus),
            TheoremCase::None => None,
        }
    }
}

/// Outcomes of the hypothesis checks entering a prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct HypothesisSummary {
    pub growth: bool,
    pub origin_sign: bool,
    pub infinity_sign: bool,
    pub reduction_condition: bool,
}

impl HypothesisSummary {
    pub fn all(&self) -> bool {
        self.growth && self.origin_sign && self.infinity_sign && self.reduction_condition
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityPrediction {
    pub case: TheoremCase,
    /// The theorem predicts at least two nontrivial solutions.
    pub expected_nontrivial_at_least_two: bool,
    pub hypotheses_hold: bool,
    /// `λ_m(A₀) = 1` and `λ_k(A∞) = 1` within the clustering tolerance.
    pub resonance_holds: bool,
    pub inequality_holds: bool,
    pub d_m0: usize,
    pub d_m_minus_1_0: usize,
    /// `d_k^∞` for the first theorem, `d_{k−1}^∞` for the second.
    pub d_inf: usize,
    pub mu: usize,
    pub note: String,
}

/// Evaluates the integer inequality of the selected case; purely arithmetic.
pub fn predict_multiplicity(
    case: TheoremCase,
    a0: &Spectrum,
    m: usize,
    ainf: &Spectrum,
    k: usize,
    hypotheses: Option<&HypothesisSummary>,
) -> Result<MultiplicityPrediction> {
    if case == TheoremCase::None {
        return Ok(MultiplicityPrediction {
            case,
            expected_nontrivial_at_least_two: false,
            hypotheses_hold: false,
            resonance_holds: false,
            inequality_holds: false,
            d_m0: 0,
            d_m_minus_1_0: 0,
            d_inf: 0,
            mu: 0,
            note: "theorem not applicable".into(),
        });
    }
    let hyp = hypotheses.ok_or_else(|| Error::MissingHypothesis(format!("case {case:?} needs hypothesis reports")))?;
    if m == 0 || k == 0 {
        return Err(Error::InvalidArgument("resonance indices m and k start at 1".into()));
    }
    let d_m0 = a0.cumulative_dims(m)?;
    let d_m_minus_1_0 = a0.cumulative_dims(m - 1)?;
    let d_inf = match case {
        TheoremCase::St1I | TheoremCase::St1Ii => ainf.cumulative_dims(k)?,
        _ => ainf.cumulative_dims(k - 1)?,
    };
    let lhs = match case {
        TheoremCase::St1I | TheoremCase::St2I => d_m0,
        _ => d_m_minus_1_0,
    };
    let near_one = |s: &Spectrum, i: usize| {
        s.eigenvalue(i)
            .map(|l| (l - 1.0).abs() <= s.clustering_tol().max(1e-9))
            .unwrap_or(false)
    };
    let resonance_holds = near_one(a0, m) && near_one(ainf, k);
    let inequality_holds = lhs != d_inf;
    let hypotheses_hold = hyp.all();
    let expected = hypotheses_hold && resonance_holds && inequality_holds;
    let note = if expected {
        "at least two nontrivial solutions predicted".to_string()
    } else if !hypotheses_hold {
        "hypotheses fail; theorem silent".to_string()
    } else if !resonance_holds {
        "resonance indices do not match eigenvalue 1; theorem silent".to_string()
    } else {
        format!("{lhs} = {d_inf}; theorem silent")
    };
    Ok(MultiplicityPrediction {
        case,
        expected_nontrivial_at_least_two: expected,
        hypotheses_hold,
        resonance_holds,
        inequality_holds,
        d_m0,
        d_m_minus_1_0,
        d_inf,
        mu: d_inf,
        note,
    })
}
