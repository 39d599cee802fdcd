//! Critical groups, groups at infinity, zero finding and Brouwer indices.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cubical::{relative_homology_z2, sample_lattice, BettiVector, CubicalOptions, CubicalPair, Lattice};
use super::ScalarFunction;
use crate::error::{Error, Result};

/// Resolutions and box for critical group computations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomologyOptions {
    pub coarse_resolution: usize,
    pub fine_resolution: usize,
    /// Half-width of the box around the critical point.
    pub box_radius: f64,
    pub cubical: CubicalOptions,
}

impl Default for HomologyOptions {
    fn default() -> Self {
        Self {
            coarse_resolution: 32,
            fine_resolution: 64,
            box_radius: 1.0,
            cubical: CubicalOptions::default(),
        }
    }
}

impl HomologyOptions {
    pub fn with_radius(mut self, box_radius: f64) -> Self {
        self.box_radius = box_radius;
        self
    }
}

fn box_bounds(center: &[f64], radius: f64) -> (Vec<f64>, Vec<f64>) {
    (
        center.iter().map(|c| c - radius).collect(),
        center.iter().map(|c| c + radius).collect(),
    )
}

fn check_point(f: &dyn ScalarFunction, u: &[f64]) -> Result<()> {
    if u.len() != f.dim() {
        return Err(Error::DomainMismatch {
            expected: f.dim(),
            actual: u.len(),
        });
    }
    Ok(())
}

/// Sublevel pair of `f` at `level` in the box of half-width `box_radius`
/// centered at `u`.
pub fn cubical_sublevel_pair(
    f: &dyn ScalarFunction,
    u: &[f64],
    box_radius: f64,
    level: f64,
    resolution: usize,
    options: &CubicalOptions,
) -> Result<CubicalPair> {
    check_point(f, u)?;
    // An even resolution puts the center on a lattice vertex.
    if resolution < 16 || !resolution.is_multiple_of(2) {
        return Err(Error::InvalidPair(format!(
            "resolution must be even and at least 16, got {resolution}"
        )));
    }
    if !(box_radius > 0.0) {
        return Err(Error::InvalidPair(format!("box radius must be positive, got {box_radius}")));
    }
    let lattice = Lattice::new(u.len(), resolution);
    let (lower, upper) = box_bounds(u, box_radius);
    let samples = sample_lattice(f, &lattice, &lower, &upper);
    CubicalPair::sublevel_from_samples(&samples, u, box_radius, resolution, level, options)
}

fn combine(coarse: BettiVector, fine: BettiVector) -> BettiVector {
    if coarse.ranks == fine.ranks {
        fine
    } else {
        BettiVector {
            ranks: fine.ranks,
            stable: false,
            coarse_ranks: Some(coarse.ranks),
        }
    }
}

/// `C_q(f, u)` at both resolutions; the finer result is returned and
/// `stable` records agreement.
pub fn critical_groups(f: &dyn ScalarFunction, u: &[f64], options: &HomologyOptions) -> Result<BettiVector> {
    check_point(f, u)?;
    let level = f.value(u);
    if !level.is_finite() {
        return Err(Error::InvalidArgument(format!("f is not finite at {u:?}")));
    }
    let at = |res| {
        let pair = cubical_sublevel_pair(f, u, options.box_radius, level, res, &options.cubical)?;
        relative_homology_z2(&pair)
    };
    let (coarse, fine) = rayon::join(|| at(options.coarse_resolution), || at(options.fine_resolution));
    Ok(combine(coarse?, fine?))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InfinityGroups {
    pub betti: BettiVector,
    pub alpha: f64,
    /// Sampled `|∇f|` stays away from zero on `{f ≤ α}` near the box boundary.
    pub boundary_transverse: bool,
    pub smallest_boundary_gradient: f64,
}

/// `C_q(f, ∞) = H_q(box, f_α ∩ box)`; `alpha` must lie below every critical
/// value found in the box.
pub fn critical_groups_at_infinity(
    f: &dyn ScalarFunction,
    alpha: f64,
    center: &[f64],
    options: &HomologyOptions,
) -> Result<InfinityGroups> {
    check_point(f, center)?;
    for z in find_zeros(f, center, options.box_radius, None, &ZeroSearch::default()) {
        let v = f.value(&z.point);
        if v <= alpha {
            return Err(Error::InvalidArgument(format!(
                "alpha = {alpha} is not below the critical value {v} at {:?}",
                z.point
            )));
        }
    }
    let at = |res: usize| {
        let lattice = Lattice::new(center.len(), res);
        let (lower, upper) = box_bounds(center, options.box_radius);
        let samples = sample_lattice(f, &lattice, &lower, &upper);
        let pair = CubicalPair::infinity_from_samples(&samples, center, options.box_radius, res, alpha)?;
        relative_homology_z2(&pair)
    };
    let (coarse, fine) = rayon::join(|| at(options.coarse_resolution), || at(options.fine_resolution));
    let betti = combine(coarse?, fine?);

    // Outer shell of the box, sampled on the coarse lattice.
    let lattice = Lattice::new(center.len(), options.coarse_resolution);
    let (lower, upper) = box_bounds(center, options.box_radius);
    let edge = 2 * options.coarse_resolution;
    let smallest = (0..lattice.len())
        .into_par_iter()
        .filter(|&i| {
            let c = lattice.coords(i);
            c[..center.len()].iter().any(|&x| x <= 2 || x >= edge - 2)
        })
        .filter_map(|i| {
            let p = lattice.point(i, &lower, &upper);
            (f.value(&p) <= alpha).then(|| f.gradient(&p).iter().map(|g| g * g).sum::<f64>().sqrt())
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(InfinityGroups {
        betti,
        alpha,
        boundary_transverse: smallest > 1e-8,
        smallest_boundary_gradient: smallest,
    })
}

/// Seeds and tolerances for locating solutions of `∇f = y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroSearch {
    pub seeds_per_axis: usize,
    /// Additional seed grids shrunk by these factors toward the center.
    pub zoom_levels: usize,
    pub max_iter: usize,
    pub tolerance: f64,
    /// Solutions closer than this fraction of the radius are merged.
    pub merge_fraction: f64,
}

impl Default for ZeroSearch {
    fn default() -> Self {
        Self {
            seeds_per_axis: 9,
            zoom_levels: 3,
            max_iter: 200,
            tolerance: 1e-11,
            merge_fraction: 1e-4,
        }
    }
}

/// A solution of `∇f = y` with the sign of the Jacobian determinant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Zero {
    pub point: Vec<f64>,
    pub determinant: f64,
}

fn jacobian(f: &dyn ScalarFunction, x: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let mut j = DMatrix::zeros(n, n);
    for c in 0..n {
        let eps = 1e-6 * x[c].abs().max(1e-2);
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[c] += eps;
        xm[c] -= eps;
        let gp = f.gradient(&xp);
        let gm = f.gradient(&xm);
        for r in 0..n {
            j[(r, c)] = (gp[r] - gm[r]) / (2.0 * eps);
        }
    }
    (&j + j.transpose()) * 0.5
}

fn residual(f: &dyn ScalarFunction, x: &[f64], target: &[f64]) -> DVector<f64> {
    let g = f.gradient(x);
    DVector::from_iterator(x.len(), g.iter().zip(target).map(|(a, b)| a - b))
}

fn newton(f: &dyn ScalarFunction, start: Vec<f64>, target: &[f64], opts: &ZeroSearch) -> Option<Vec<f64>> {
    let mut x = start;
    let mut r = residual(f, &x, target);
    for _ in 0..opts.max_iter {
        let rn = r.norm();
        if !rn.is_finite() {
            return None;
        }
        if rn <= opts.tolerance {
            return Some(x);
        }
        let j = jacobian(f, &x);
        let step = j.clone().svd(true, true).solve(&(-&r), 1e-14).ok()?;
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..30 {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, d)| a + t * d).collect();
            let rt = residual(f, &trial, target);
            if rt.norm() < rn {
                x = trial;
                r = rt;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (r.norm() <= opts.tolerance).then_some(x)
}

/// All solutions of `∇f = target` (zero when `None`) found from a seed grid
/// in the box, plus zoomed grids around the center for degenerate points.
pub fn find_zeros(
    f: &dyn ScalarFunction,
    center: &[f64],
    radius: f64,
    target: Option<&[f64]>,
    opts: &ZeroSearch,
) -> Vec<Zero> {
    let n = center.len();
    let zero = vec![0.0; n];
    let target = target.unwrap_or(&zero);
    let mut seeds = Vec::new();
    let k = opts.seeds_per_axis.max(2);
    for level in 0..=opts.zoom_levels {
        let r = radius * 0.1f64.powi(level as i32);
        for idx in 0..k.pow(n as u32) {
            let mut t = idx;
            let p: Vec<f64> = (0..n)
                .map(|a| {
                    let i = t % k;
                    t /= k;
                    center[a] - r + 2.0 * r * (i as f64 + 0.5) / k as f64
                })
                .collect();
            seeds.push(p);
        }
    }
    let found: Vec<Vec<f64>> = seeds
        .into_par_iter()
        .filter_map(|s| newton(f, s, target, opts))
        .filter(|x| x.iter().zip(center).all(|(a, c)| (a - c).abs() <= radius))
        .collect();
    let merge = opts.merge_fraction * radius;
    let mut zeros: Vec<Zero> = Vec::new();
    for x in found {
        if zeros
            .iter()
            .all(|z| z.point.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() > merge)
        {
            let determinant = jacobian(f, &x).determinant();
            zeros.push(Zero { point: x, determinant });
        }
    }
    zeros.sort_by(|a, b| a.point.partial_cmp(&b.point).unwrap_or(std::cmp::Ordering::Equal));
    zeros
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsolationReport {
    pub isolated: bool,
    pub zeros_found: usize,
    /// Gradient zeros in the box other than the examined point.
    pub others: Vec<Vec<f64>>,
}

/// Dense-seed Newton search for gradient zeros other than `u` in the box.
pub fn isolation_check(f: &dyn ScalarFunction, u: &[f64], radius: f64) -> IsolationReport {
    let zeros = find_zeros(f, u, radius, None, &ZeroSearch::default());
    let near = 1e-3 * radius;
    let others: Vec<Vec<f64>> = zeros
        .iter()
        .filter(|z| z.point.iter().zip(u).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() > near)
        .map(|z| z.point.clone())
        .collect();
    IsolationReport {
        isolated: others.is_empty(),
        zeros_found: zeros.len(),
        others,
    }
}

/// Parameters of the preimage count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexOptions {
    /// Half-width of the box in which preimages are counted.
    pub radius: f64,
    /// Magnitude of the random regular values.
    pub regular_value: f64,
    pub seed: u64,
    pub search: ZeroSearch,
}

impl Default for IndexOptions {
    fn default() -> Self {
        Self {
            radius: 0.5,
            regular_value: 1e-4,
            seed: 7,
            search: ZeroSearch::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexReport {
    /// Signed preimage count of a small regular value.
    pub index: i64,
    /// Alternating sum of critical group ranks.
    pub poincare_hopf: i64,
    pub agree: bool,
    pub preimage_counts: [i64; 2],
    pub preimages: [usize; 2],
    pub betti: BettiVector,
}

/// Brouwer index of `∇f` at `u`, computed by signed preimage counts of two
/// regular values and cross-checked against the alternating sum of critical
/// group ranks.
pub fn brouwer_index(
    f: &dyn ScalarFunction,
    u: &[f64],
    homology: &HomologyOptions,
    options: &IndexOptions,
) -> Result<IndexReport> {
    check_point(f, u)?;
    let betti = critical_groups(f, u, homology)?;
    let poincare_hopf = betti.euler_characteristic();
    let n = u.len();
    let g0 = f.gradient(u);
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut counts = [0i64; 2];
    let mut sizes = [0usize; 2];
    for slot in 0..2 {
        let mut attempt = 0;
        loop {
            attempt += 1;
            let dir: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt().max(1e-12);
            let target: Vec<f64> = dir
                .iter()
                .zip(&g0)
                .map(|(d, g)| g + options.regular_value * d / norm)
                .collect();
            let zeros = find_zeros(f, u, options.radius, Some(&target), &options.search);
            let regular = zeros.iter().all(|z| z.determinant.abs() > 1e-10);
            if regular || attempt >= 5 {
                if !regular {
                    return Err(Error::Index("could not find a regular value near the critical point".into()));
                }
                counts[slot] = zeros.iter().map(|z| z.determinant.signum() as i64).sum();
                sizes[slot] = zeros.len();
                break;
            }
        }
    }
    if counts[0] != counts[1] {
        return Err(Error::Index(format!(
            "preimage counts differ across regular values: {} vs {}",
            counts[0], counts[1]
        )));
    }
    Ok(IndexReport {
        index: counts[0],
        poincare_hopf,
        agree: counts[0] == poincare_hopf,
        preimage_counts: counts,
        preimages: sizes,
        betti,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homology::ModelFunctional;

    fn quad(id: &str, signs: Vec<f64>) -> ModelFunctional {
        let s2 = signs.clone();
        ModelFunctional::new(
            id,
            signs.len(),
            move |x| x.iter().zip(&signs).map(|(a, s)| s * a * a).sum(),
            move |x| x.iter().zip(&s2).map(|(a, s)| 2.0 * s * a).collect(),
        )
    }

    fn monkey() -> ModelFunctional {
        ModelFunctional::new(
            "monkey",
            2,
            |x| x[0].powi(3) - 3.0 * x[0] * x[1] * x[1],
            |x| vec![3.0 * x[0] * x[0] - 3.0 * x[1] * x[1], -6.0 * x[0] * x[1]],
        )
    }

    #[test]
    fn sublevel_pair_requires_even_resolution() {
        let f = quad("min", vec![1.0, 1.0]);
        assert!(cubical_sublevel_pair(&f, &[0.0, 0.0], 1.0, 0.0, 15, &CubicalOptions::default()).is_err());
        let p = cubical_sublevel_pair(&f, &[0.0, 0.0], 1.0, 0.0, 16, &CubicalOptions::default()).unwrap();
        // Only the four cells touching the origin.
        let lattice = p.lattice();
        let tops = (0..lattice.top_len())
            .filter(|&t| p.subcomplex_mask[lattice.top_cell(t)])
            .count();
        assert_eq!(tops, 4);
    }

    #[test]
    fn nondegenerate_points_have_delta_groups() {
        let opts = HomologyOptions::default();
        for (signs, m) in [
            (vec![1.0, 1.0], 0),
            (vec![1.0, -1.0], 1),
            (vec![-1.0, -1.0], 2),
            (vec![-1.0], 1),
            (vec![1.0, -1.0, -1.0], 2),
        ] {
            let n = signs.len();
            let b = critical_groups(&quad("q", signs), &vec![0.0; n], &opts).unwrap();
            assert!(b.stable);
            assert_eq!(b, BettiVector::delta(m, n));
        }
    }

    #[test]
    fn degenerate_points() {
        let opts = HomologyOptions::default();
        let m = monkey();
        let b = critical_groups(&m, &[0.0, 0.0], &opts).unwrap();
        assert_eq!(b.ranks, vec![0, 2, 0]);
        assert!(b.stable);
        let quartic = ModelFunctional::new("x4", 1, |x| x[0].powi(4), |x| vec![4.0 * x[0].powi(3)]);
        assert_eq!(critical_groups(&quartic, &[0.0], &opts).unwrap().ranks, vec![1, 0]);
        let neg = ModelFunctional::new("-x4", 1, |x| -x[0].powi(4), |x| vec![-4.0 * x[0].powi(3)]);
        assert_eq!(critical_groups(&neg, &[0.0], &opts).unwrap().ranks, vec![0, 1]);
    }

    #[test]
    fn groups_at_infinity() {
        let opts = HomologyOptions::default().with_radius(2.0);
        let c = [0.0, 0.0];
        let r = critical_groups_at_infinity(&quad("c", vec![1.0, 1.0]), -1.0, &c, &opts).unwrap();
        assert_eq!(r.betti.ranks, vec![1, 0, 0]);
        let r = critical_groups_at_infinity(&quad("n", vec![-1.0, -1.0]), -2.0, &c, &opts).unwrap();
        assert_eq!(r.betti.ranks, vec![0, 0, 1]);
        assert!(r.boundary_transverse);
        let r = critical_groups_at_infinity(&quad("s", vec![1.0, -1.0]), -1.0, &c, &opts).unwrap();
        assert_eq!(r.betti.ranks, vec![0, 1, 0]);
        assert!(critical_groups_at_infinity(&quad("c", vec![1.0, 1.0]), 0.5, &c, &opts).is_err());
    }

    #[test]
    fn brouwer_indices() {
        let h = HomologyOptions::default();
        let i = IndexOptions::default();
        let r = brouwer_index(&quad("min", vec![1.0, 1.0]), &[0.0, 0.0], &h, &i).unwrap();
        assert_eq!((r.index, r.agree), (1, true));
        let r = brouwer_index(&quad("sad", vec![1.0, -1.0, 1.0]), &[0.0; 3], &h, &i).unwrap();
        assert_eq!((r.index, r.agree), (-1, true));
        let r = brouwer_index(&monkey(), &[0.0, 0.0], &h, &i).unwrap();
        assert_eq!((r.index, r.poincare_hopf, r.preimages[0]), (-2, -2, 2));
    }

    #[test]
    fn isolation() {
        let dw = ModelFunctional::new(
            "dw",
            2,
            |x| (x[0] * x[0] - 1.0).powi(2) + x[1] * x[1],
            |x| vec![4.0 * x[0] * (x[0] * x[0] - 1.0), 2.0 * x[1]],
        );
        assert!(isolation_check(&dw, &[1.0, 0.0], 0.5).isolated);
        let wide = isolation_check(&dw, &[0.0, 0.0], 1.5);
        assert!(!wide.isolated);
        assert_eq!(wide.zeros_found, 3);
    }
}
