//! Weighted eigenproblem `L z = λ M_A z` for the block Laplacian `L` and the
//! node-wise mass operator `M_A` built from a matrix field, plus the spectral
//! splittings used by the reduction.
//!
//! `M_A` couples only the two components at the same node, so its Cholesky
//! factor is block-diagonal with diagonal blocks and the reduced standard
//! problem is assembled in `O(N²)` before a dense symmetric eigensolve.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridDomain;
use crate::problem::MatrixField;

/// Relative tolerance grouping numerically equal eigenvalues.
pub const DEFAULT_CLUSTERING_TOL: f64 = 1e-6;
/// Relative residual bound every returned eigenpair must meet.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Distinct weighted eigenvalues with H¹₀-orthonormal eigenspace bases.
#[derive(Debug, Clone)]
pub struct Spectrum {
    grid: GridDomain,
    eigenvalues: Vec<f64>,
    eigenspaces: Vec<DMatrix<f64>>,
    clustering_tol: f64,
    complete: bool,
    max_residual: f64,
    spreads: Vec<f64>,
}

/// One row of the exported spectrum table.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SpectrumRow {
    pub index: usize,
    pub eigenvalue: f64,
    pub multiplicity: usize,
    pub cumulative_dim: usize,
    /// Relative spread of the eigenvalues grouped into this cluster.
    pub cluster_spread: f64,
    /// Relative gap to the next distinct eigenvalue; absent for the last one.
    pub gap_to_next: Option<f64>,
}

impl Spectrum {
    pub fn grid(&self) -> &GridDomain {
        &self.grid
    }

    /// Number of distinct eigenvalues computed.
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn distinct_eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        self.eigenspaces.iter().map(|e| e.ncols()).collect()
    }

    /// The `k`-th distinct eigenvalue, counting from 1.
    pub fn eigenvalue(&self, k: usize) -> Result<f64> {
        self.check_index(k)?;
        Ok(self.eigenvalues[k - 1])
    }

    /// Basis of the `k`-th eigenspace (columns), counting from 1.
    pub fn eigenspace(&self, k: usize) -> Result<&DMatrix<f64>> {
        self.check_index(k)?;
        Ok(&self.eigenspaces[k - 1])
    }

    pub fn clustering_tol(&self) -> f64 {
        self.clustering_tol
    }

    /// Whether every eigenpair of the discrete problem was computed.
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// Largest relative residual `‖Lz − λMz‖ / ‖Lz‖` over returned pairs.
    pub fn max_residual(&self) -> f64 {
        self.max_residual
    }

    /// Sum of the first `n` multiplicities.
    pub fn cumulative_dims(&self, n: usize) -> Result<usize> {
        if n > self.len() {
            return Err(Error::OutOfRange {
                index: n,
                available: self.len(),
            });
        }
        Ok(self.eigenspaces[..n].iter().map(|e| e.ncols()).sum())
    }

    /// Index (from 1) of the distinct eigenvalue within `tol` (relative) of `target`.
    pub fn index_of(&self, target: f64, tol: f64) -> Option<usize> {
        self.eigenvalues
            .iter()
            .position(|&l| (l - target).abs() <= tol * target.abs().max(l.abs()))
            .map(|i| i + 1)
    }

    pub fn table(&self) -> Vec<SpectrumRow> {
        let mut cumulative = 0;
        (0..self.len())
            .map(|i| {
                let multiplicity = self.eigenspaces[i].ncols();
                cumulative += multiplicity;
                SpectrumRow {
                    index: i + 1,
                    eigenvalue: self.eigenvalues[i],
                    multiplicity,
                    cumulative_dim: cumulative,
                    cluster_spread: self.spreads[i],
                    gap_to_next: self
                        .eigenvalues
                        .get(i + 1)
                        .map(|next| (next - self.eigenvalues[i]) / next),
                }
            })
            .collect()
    }

    /// Smallest relative gap between consecutive distinct eigenvalues; small
    /// values flag clusters that may have been split or merged by rounding.
    pub fn min_relative_gap(&self) -> Option<f64> {
        self.table().iter().filter_map(|r| r.gap_to_next).reduce(f64::min)
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.len() {
            return Err(Error::OutOfRange {
                index: k,
                available: self.len(),
            });
        }
        Ok(())
    }

    /// Columns of the eigenspaces with indices in `range` (0-based), side by side.
    fn stacked(&self, range: std::ops::Range<usize>) -> DMatrix<f64> {
        let rows = self.grid.field_len();
        let cols: usize = self.eigenspaces[range.clone()].iter().map(|e| e.ncols()).sum();
        let mut out = DMatrix::zeros(rows, cols);
        let mut at = 0;
        for e in &self.eigenspaces[range] {
            out.columns_mut(at, e.ncols()).copy_from(e);
            at += e.ncols();
        }
        out
    }
}

/// Factor of `M_A` in the form `C⁻¹ = [[P, 0], [Q, R]]` with diagonal blocks.
struct MassFactor {
    p: DVector<f64>,
    q: DVector<f64>,
    r: DVector<f64>,
}

impl MassFactor {
    fn new(grid: &GridDomain, a: &MatrixField) -> Result<Self> {
        a.check_positive_definite(grid)?;
        let n = grid.len();
        let (mut p, mut q, mut r) = (DVector::zeros(n), DVector::zeros(n), DVector::zeros(n));
        for (i, m) in a.sample(grid).iter().enumerate() {
            let c11 = m[(0, 0)].sqrt();
            let c21 = m[(0, 1)] / c11;
            let c22 = (m[(1, 1)] - c21 * c21).sqrt();
            p[i] = 1.0 / c11;
            r[i] = 1.0 / c22;
            q[i] = -r[i] * c21 * p[i];
        }
        Ok(Self { p, q, r })
    }

    /// `C⁻¹ L_b C⁻ᵀ`.
    fn reduce(&self, lap: &DMatrix<f64>) -> DMatrix<f64> {
        let n = lap.nrows();
        let mut t = DMatrix::zeros(2 * n, 2 * n);
        for j in 0..n {
            for i in 0..n {
                let l = lap[(i, j)];
                if l == 0.0 {
                    continue;
                }
                t[(i, j)] = self.p[i] * l * self.p[j];
                t[(i, n + j)] = self.p[i] * l * self.q[j];
                t[(n + i, j)] = self.q[i] * l * self.p[j];
                t[(n + i, n + j)] = self.q[i] * l * self.q[j] + self.r[i] * l * self.r[j];
            }
        }
        t
    }

    /// `z = C⁻ᵀ y`.
    fn back_transform(&self, y: &DVector<f64>) -> DVector<f64> {
        let n = self.p.len();
        let mut z = DVector::zeros(2 * n);
        for i in 0..n {
            z[i] = self.p[i] * y[i] + self.q[i] * y[n + i];
            z[n + i] = self.r[i] * y[n + i];
        }
        z
    }
}

/// `M_A z` with `M_A` the node-wise mass operator of `a`.
pub fn apply_mass(samples: &[nalgebra::Matrix2<f64>], z: &DVector<f64>) -> DVector<f64> {
    let n = samples.len();
    let mut out = DVector::zeros(2 * n);
    for (i, m) in samples.iter().enumerate() {
        out[i] = m[(0, 0)] * z[i] + m[(0, 1)] * z[n + i];
        out[n + i] = m[(1, 0)] * z[i] + m[(1, 1)] * z[n + i];
    }
    out
}

fn block_apply(lap: &DMatrix<f64>, z: &DVector<f64>) -> DVector<f64> {
    let n = lap.nrows();
    let mut out = DVector::zeros(2 * n);
    out.rows_mut(0, n).copy_from(&(lap * z.rows(0, n)));
    out.rows_mut(n, n).copy_from(&(lap * z.rows(n, n)));
    out
}

/// Groups ascending values into clusters `[start, end)` where each member is
/// within `tol` (relative) of the cluster's first value.
fn cluster(values: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[start] > tol * values[start].abs() {
            out.push(start..i);
            start = i;
        }
    }
    out
}

fn sorted_eigen(t: DMatrix<f64>, with_vectors: bool) -> (Vec<f64>, Option<DMatrix<f64>>, Vec<usize>) {
    if with_vectors {
        let eig = t.symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        (values, Some(eig.eigenvectors), order)
    } else {
        let mut values: Vec<f64> = t.symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        let order = (0..values.len()).collect();
        (values, None, order)
    }
}

/// All `2N` weighted eigenvalues counted with multiplicity, ascending.
pub fn weighted_eigenvalues(grid: &GridDomain, a: &MatrixField) -> Result<Vec<f64>> {
    let factor = MassFactor::new(grid, a)?;
    let (values, _, _) = sorted_eigen(factor.reduce(&grid.laplacian()), false);
    check_positive(&values)?;
    Ok(values)
}

fn check_positive(values: &[f64]) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigensolver("non-finite eigenvalue".into()));
    }
    if let Some(&lo) = values.first() {
        if lo <= 0.0 {
            return Err(Error::Eigensolver(format!("nonpositive eigenvalue {lo:e}")));
        }
    }
    Ok(())
}

/// Solves `−Δz = λ A z` and returns at least the first `count` eigenpairs,
/// extended so the last cluster is complete.
pub fn solve_weighted_eigenproblem(grid: &GridDomain, a: &MatrixField, count: usize) -> Result<Spectrum> {
    solve_with_tol(grid, a, count, DEFAULT_CLUSTERING_TOL)
}

pub fn solve_with_tol(grid: &GridDomain, a: &MatrixField, count: usize, clustering_tol: f64) -> Result<Spectrum> {
    let dim = grid.field_len();
    if count == 0 || count > dim {
        return Err(Error::InvalidArgument(format!(
            "eigenpair count must lie in 1..={dim}, got {count}"
        )));
    }
    if !(clustering_tol > 0.0) {
        return Err(Error::InvalidArgument("clustering tolerance must be positive".into()));
    }
    let factor = MassFactor::new(grid, a)?;
    let lap = grid.laplacian();
    let (values, vectors, order) = sorted_eigen(factor.reduce(&lap), true);
    check_positive(&values)?;
    let vectors = vectors.expect("eigenvectors requested");
    let samples = a.sample(grid);
    let weight = grid.quadrature_weight();

    let clusters = cluster(&values, clustering_tol);
    let mut eigenvalues = Vec::new();
    let mut eigenspaces = Vec::new();
    let mut spreads = Vec::new();
    let mut max_residual: f64 = 0.0;
    let mut taken = 0;
    for range in clusters {
        if taken >= count {
            break;
        }
        let mut basis = DMatrix::zeros(dim, range.len());
        for (col, idx) in range.clone().enumerate() {
            let lambda = values[idx];
            let y = vectors.column(order[idx]).into_owned();
            let z = factor.back_transform(&y);
            let lz = block_apply(&lap, &z);
            let residual = (&lz - apply_mass(&samples, &z) * lambda).norm() / lz.norm();
            max_residual = max_residual.max(residual);
            basis.set_column(col, &(z / (weight * lambda).sqrt()));
        }
        let first = values[range.start];
        let last = values[range.end - 1];
        eigenvalues.push(range.clone().map(|i| values[i]).sum::<f64>() / range.len() as f64);
        spreads.push((last - first) / first);
        taken += range.len();
        eigenspaces.push(basis);
    }
    if max_residual > RESIDUAL_TOL {
        return Err(Error::Eigensolver(format!(
            "relative eigenpair residual {max_residual:e} exceeds {RESIDUAL_TOL:e}"
        )));
    }
    Ok(Spectrum {
        grid: grid.clone(),
        eigenvalues,
        eigenspaces,
        clustering_tol,
        complete: taken == dim,
        max_residual,
        spreads,
    })
}

/// Distinct eigenvalues and multiplicities without eigenvectors.
pub fn distinct_eigenvalues(grid: &GridDomain, a: &MatrixField) -> Result<Vec<(f64, usize)>> {
    let values = weighted_eigenvalues(grid, a)?;
    Ok(cluster(&values, DEFAULT_CLUSTERING_TOL)
        .into_iter()
        .map(|r| (r.clone().map(|i| values[i]).sum::<f64>() / r.len() as f64, r.len()))
        .collect())
}

/// Returns `λ_k(A)·A`, whose `k`-th distinct eigenvalue is 1, together with the factor.
pub fn normalize_resonance(a: &MatrixField, k: usize, grid: &GridDomain) -> Result<(MatrixField, f64)> {
    let distinct = distinct_eigenvalues(grid, a)?;
    if k == 0 || k > distinct.len() {
        return Err(Error::OutOfRange {
            index: k,
            available: distinct.len(),
        });
    }
    let factor = distinct[k - 1].0;
    Ok((a.scaled(factor), factor))
}

/// Finds `e` such that the `j`-th weighted eigenvalue of `A + e·I`, counted
/// with multiplicity from 1, equals 1.
pub fn resonance_shift(a: &MatrixField, j: usize, grid: &GridDomain) -> Result<f64> {
    let dim = grid.field_len();
    if j == 0 || j > dim {
        return Err(Error::OutOfRange { index: j, available: dim });
    }
    let eval = |e: f64| -> Result<f64> { Ok(weighted_eigenvalues(grid, &a.shifted(e))?[j - 1] - 1.0) };
    let floor = -a.min_eigenvalue(grid).0;
    let scale = a.sup_norm(grid).max(1.0);
    let f0 = eval(0.0)?;
    if f0 == 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut flo, mut hi, mut fhi);
    if f0 > 0.0 {
        lo = 0.0;
        flo = f0;
        hi = scale;
        fhi = eval(hi)?;
        let mut tries = 0;
        while fhi > 0.0 {
            tries += 1;
            if tries > 60 {
                return Err(Error::Eigensolver("no shift brings the eigenvalue down to 1".into()));
            }
            lo = hi;
            flo = fhi;
            hi *= 2.0;
            fhi = eval(hi)?;
        }
    } else {
        hi = 0.0;
        fhi = f0;
        let mut t = 1;
        loop {
            lo = floor * (1.0 - 0.5f64.powi(t));
            flo = eval(lo)?;
            if flo > 0.0 {
                break;
            }
            hi = lo;
            fhi = flo;
            t += 1;
            if t > 60 {
                return Err(Error::Eigensolver("no shift raises the eigenvalue to 1".into()));
            }
        }
    }
    // Illinois variant of regula falsi; f is decreasing in e.
    let mut side = 0;
    for _ in 0..200 {
        let e = (lo * fhi - hi * flo) / (fhi - flo);
        let fe = eval(e)?;
        if fe.abs() <= 1e-14 || (hi - lo).abs() <= 1e-15 * scale {
            return Ok(e);
        }
        if fe > 0.0 {
            lo = e;
            flo = fe;
            if side == 1 {
                fhi *= 0.5;
            }
            side = 1;
        } else {
            hi = e;
            fhi = fe;
            if side == -1 {
                flo *= 0.5;
            }
            side = -1;
        }
    }
    Ok((lo * fhi - hi * flo) / (fhi - flo))
}

/// Which reduction condition a splitting targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitSide {
    /// `X⁺` finite and the fiber problem is a strictly concave maximization.
    AMinusCase,
    /// `X⁻` finite and the fiber problem is a strictly convex minimization.
    APlusCase,
}

impl SplitSide {
    /// `+1` for the minimization orientation, `−1` for maximization.
    pub fn sign(self) -> f64 {
        match self {
            SplitSide::AMinusCase => -1.0,
            SplitSide::APlusCase => 1.0,
        }
    }
}

/// `X = X⁻ ⊕ X⁺` with H¹₀-orthonormal bases stored as matrix columns.
#[derive(Debug, Clone)]
pub struct SpectralSplit {
    minus_basis: DMatrix<f64>,
    plus_basis: DMatrix<f64>,
    side: SplitSide,
    cut: usize,
}

impl SpectralSplit {
    /// Builds a split from explicit bases, which must be H¹₀-orthonormal.
    pub fn from_bases(minus_basis: DMatrix<f64>, plus_basis: DMatrix<f64>, side: SplitSide, cut: usize) -> Result<Self> {
        if minus_basis.nrows() != plus_basis.nrows() {
            return Err(Error::DomainMismatch {
                expected: minus_basis.nrows(),
                actual: plus_basis.nrows(),
            });
        }
        Ok(Self {
            minus_basis,
            plus_basis,
            side,
            cut,
        })
    }

    pub fn minus_basis(&self) -> &DMatrix<f64> {
        &self.minus_basis
    }

    pub fn plus_basis(&self) -> &DMatrix<f64> {
        &self.plus_basis
    }

    pub fn minus_dim(&self) -> usize {
        self.minus_basis.ncols()
    }

    pub fn plus_dim(&self) -> usize {
        self.plus_basis.ncols()
    }

    /// Dimension of the finite side: `X⁺` in the A_minus case, `X⁻` otherwise.
    pub fn mu(&self) -> usize {
        match self.side {
            SplitSide::AMinusCase => self.plus_dim(),
            SplitSide::APlusCase => self.minus_dim(),
        }
    }

    pub fn side(&self) -> SplitSide {
        self.side
    }

    /// Resonance index the split was cut at.
    pub fn cut(&self) -> usize {
        self.cut
    }

    /// Field values of `E⁻ a + E⁺ b`.
    pub fn lift(&self, minus: &DVector<f64>, plus: &DVector<f64>) -> DVector<f64> {
        &self.minus_basis * minus + &self.plus_basis * plus
    }
}

/// Splits a complete spectrum at resonance index `k` (counting from 1).
///
/// A_minus case: `X⁺` spans eigenspaces `1..k−1`, so `mu = d_{k−1}`.
/// A_plus case: `X⁻` spans eigenspaces `1..k`, so `mu = d_k`.
pub fn build_split(spectrum: &Spectrum, k: usize, side: SplitSide) -> Result<SpectralSplit> {
    if !spectrum.is_complete() {
        return Err(Error::InvalidArgument(
            "a splitting needs the complete spectrum; request all 2N eigenpairs".into(),
        ));
    }
    if k == 0 || k > spectrum.len() {
        return Err(Error::OutOfRange {
            index: k,
            available: spectrum.len(),
        });
    }
    let all = spectrum.len();
    let (minus, plus) = match side {
        SplitSide::AMinusCase => (spectrum.stacked(k - 1..all), spectrum.stacked(0..k - 1)),
        SplitSide::APlusCase => (spectrum.stacked(0..k), spectrum.stacked(k..all)),
    };
    SpectralSplit::from_bases(minus, plus, side, k)
}

/// `X = V⁻ ⊕ V⁰ ⊕ V⁺` by eigenvalue below, equal to, or above 1.
#[derive(Debug, Clone)]
pub struct LinkingSplit {
    pub below: DMatrix<f64>,
    pub kernel: DMatrix<f64>,
    pub above: DMatrix<f64>,
}

/// Splits a complete spectrum around the eigenvalue 1; `tol` is relative.
pub fn linking_split(spectrum: &Spectrum, tol: f64) -> Result<LinkingSplit> {
    if !spectrum.is_complete() {
        return Err(Error::InvalidArgument(
            "a splitting needs the complete spectrum; request all 2N eigenpairs".into(),
        ));
    }
    let vals = spectrum.distinct_eigenvalues();
    let below = vals.iter().take_while(|&&l| l < 1.0 - tol).count();
    let kernel = vals[below..].iter().take_while(|&&l| l <= 1.0 + tol).count();
    Ok(LinkingSplit {
        below: spectrum.stacked(0..below),
        kernel: spectrum.stacked(below..below + kernel),
        above: spectrum.stacked(below + kernel..vals.len()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::FieldRole;
    use approx::assert_relative_eq;

    fn h10_gram(grid: &GridDomain, a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
        let lb = grid.block_laplacian();
        a.transpose() * lb * b * grid.quadrature_weight()
    }

    #[test]
    fn identity_weight_doubles_scalar_spectrum() {
        let g = GridDomain::unit_interval(31).unwrap();
        let s = solve_weighted_eigenproblem(&g, &MatrixField::identity(FieldRole::Other), 62).unwrap();
        let closed = g.closed_form_eigenvalues_1d();
        assert_eq!(s.len(), 31);
        for (i, l) in s.distinct_eigenvalues().iter().enumerate() {
            assert_relative_eq!(*l, closed[i], max_relative = 1e-10);
        }
        assert!(s.multiplicities().iter().all(|&m| m == 2));
        assert_eq!(s.cumulative_dims(3).unwrap(), 6);
        assert_eq!(s.cumulative_dims(0).unwrap(), 0);
        assert!(s.cumulative_dims(32).is_err());
        assert!(s.is_complete());
    }

    #[test]
    fn diagonal_weight_merges_two_scalar_spectra() {
        let g = GridDomain::unit_interval(20).unwrap();
        let s = solve_weighted_eigenproblem(&g, &MatrixField::diag(FieldRole::Other, 1.0, 4.0), 40).unwrap();
        // Brute force: dense generalized problem through an explicit inverse.
        let lb = g.block_laplacian();
        let mut minv = DMatrix::<f64>::identity(40, 40);
        for i in 20..40 {
            minv[(i, i)] = 0.25;
        }
        let mut oracle: Vec<f64> = (minv * lb).eigenvalues().unwrap().iter().copied().collect();
        oracle.sort_by(f64::total_cmp);
        assert_eq!(s.len(), 40);
        for (l, o) in s.distinct_eigenvalues().iter().zip(&oracle) {
            assert_relative_eq!(*l, *o, max_relative = 1e-9);
        }
        assert!(s.multiplicities().iter().all(|&m| m == 1));
        let closed = g.closed_form_eigenvalues_1d();
        assert_relative_eq!(s.eigenvalue(1).unwrap(), closed[0] / 4.0, max_relative = 1e-10);
        // d_3: two quarter-scaled eigenvalues lie below the first unscaled one.
        assert!(closed[1] / 4.0 < closed[0] && closed[0] < closed[2] / 4.0);
        assert_eq!(s.cumulative_dims(3).unwrap(), 3);
    }

    #[test]
    fn homogeneity_and_normalization() {
        let g = GridDomain::unit_interval(15).unwrap();
        let a = MatrixField::from_fn(FieldRole::Ainf, "varying", |x| {
            nalgebra::Matrix2::new(2.0 + x[0], 0.3, 0.3, 1.0 + x[0] * x[0])
        });
        let s1 = distinct_eigenvalues(&g, &a).unwrap();
        let s3 = distinct_eigenvalues(&g, &a.scaled(3.0)).unwrap();
        assert_relative_eq!(s3[0].0, s1[0].0 / 3.0, max_relative = 1e-12);
        let (normalized, factor) = normalize_resonance(&a, 2, &g).unwrap();
        assert_relative_eq!(factor, s1[1].0, max_relative = 1e-14);
        let sn = distinct_eigenvalues(&g, &normalized).unwrap();
        assert!((sn[1].0 - 1.0).abs() < 1e-10);
        let (again, f2) = normalize_resonance(&normalized, 2, &g).unwrap();
        assert!((f2 - 1.0).abs() < 1e-10);
        assert_relative_eq!(again.at([0.5, 0.0])[(0, 0)], normalized.at([0.5, 0.0])[(0, 0)], max_relative = 1e-10);
    }

    #[test]
    fn eigenbases_are_h10_orthonormal_and_residuals_small() {
        let g = GridDomain::unit_interval(12).unwrap();
        let a = MatrixField::from_fn(FieldRole::Other, "coupled", |x| {
            nalgebra::Matrix2::new(1.0 + x[0], 0.5 * x[0], 0.5 * x[0], 2.0)
        });
        let s = solve_weighted_eigenproblem(&g, &a, 24).unwrap();
        assert!(s.max_residual() <= RESIDUAL_TOL);
        let all = s.stacked(0..s.len());
        let gram = h10_gram(&g, &all, &all);
        assert!((gram - DMatrix::<f64>::identity(24, 24)).amax() < 1e-9);
    }

    #[test]
    fn split_dimensions_and_orthogonality() {
        let g = GridDomain::unit_interval(10).unwrap();
        let s = solve_weighted_eigenproblem(&g, &MatrixField::identity(FieldRole::Other), 20).unwrap();
        let split = build_split(&s, 2, SplitSide::AMinusCase).unwrap();
        assert_eq!(split.mu(), 2);
        assert_eq!(split.minus_dim(), 18);
        let cross = h10_gram(&g, split.minus_basis(), split.plus_basis());
        assert!(cross.amax() <= 1e-8);
        let empty = build_split(&s, 1, SplitSide::AMinusCase).unwrap();
        assert_eq!(empty.mu(), 0);
        assert_eq!(empty.plus_dim(), 0);
        let dual = build_split(&s, 1, SplitSide::APlusCase).unwrap();
        assert_eq!(dual.mu(), 2);
        assert!(build_split(&s, 11, SplitSide::AMinusCase).is_err());
        let partial = solve_weighted_eigenproblem(&g, &MatrixField::identity(FieldRole::Other), 4).unwrap();
        assert!(!partial.is_complete());
        assert_eq!(partial.len(), 2);
        assert!(build_split(&partial, 2, SplitSide::AMinusCase).is_err());
    }

    #[test]
    fn count_extends_to_complete_cluster() {
        let g = GridDomain::unit_interval(10).unwrap();
        let s = solve_weighted_eigenproblem(&g, &MatrixField::identity(FieldRole::Other), 3).unwrap();
        assert_eq!(s.multiplicities(), vec![2, 2]);
    }

    #[test]
    fn resonance_shift_hits_target() {
        let g = GridDomain::unit_interval(15).unwrap();
        let mu1 = g.closed_form_eigenvalues_1d()[0];
        let a = MatrixField::diag(FieldRole::Ainf, 3.5 * mu1, mu1);
        let e = resonance_shift(&a, 3, &g).unwrap();
        let vals = weighted_eigenvalues(&g, &a.shifted(e)).unwrap();
        assert!((vals[2] - 1.0).abs() < 1e-12);
        let mu2 = g.closed_form_eigenvalues_1d()[1];
        assert_relative_eq!(e, mu2 - 3.5 * mu1, max_relative = 1e-9);
        // Negative shifts are found too.
        let big = MatrixField::identity(FieldRole::Other).scaled(2.0 * mu1);
        let e = resonance_shift(&big, 1, &g).unwrap();
        assert_relative_eq!(e, -mu1, max_relative = 1e-9);
    }

    #[test]
    fn linking_split_partitions_space() {
        let g = GridDomain::unit_interval(10).unwrap();
        let (a, _) = normalize_resonance(&MatrixField::diag(FieldRole::A0, 1.0, 4.0), 2, &g).unwrap();
        let s = solve_weighted_eigenproblem(&g, &a, 20).unwrap();
        let l = linking_split(&s, 1e-8).unwrap();
        assert_eq!((l.below.ncols(), l.kernel.ncols(), l.above.ncols()), (1, 1, 18));
    }

    #[test]
    fn projectors_resolve_identity() {
        let g = GridDomain::unit_interval(9).unwrap();
        let a = MatrixField::from_fn(FieldRole::Other, "coupled", |x| {
            nalgebra::Matrix2::new(1.0 + x[0], 0.2, 0.2, 1.5)
        });
        let s = solve_weighted_eigenproblem(&g, &a, 18).unwrap();
        let split = build_split(&s, 3, SplitSide::AMinusCase).unwrap();
        let lb = g.block_laplacian() * g.quadrature_weight();
        let z = DVector::from_fn(18, |i, _| (i as f64 * 0.7).sin());
        let minus = split.minus_basis().transpose() * &lb * &z;
        let plus = split.plus_basis().transpose() * &lb * &z;
        let back = split.lift(&minus, &plus);
        assert!((back - &z).norm() <= 1e-8 * z.norm());
    }
}
