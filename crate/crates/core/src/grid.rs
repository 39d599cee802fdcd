//! Uniform finite-difference grids on intervals and rectangles with
//! homogeneous Dirichlet boundary conditions.
//!
//! Only interior nodes are stored. Scalar grid functions are flat vectors of
//! length `N`; a [`VectorField2`] stacks the `u` block and the `v` block into a
//! vector of length `2N`. The discrete H¹₀ inner product is
//! `h^n · zᵀ L z` with `L` the block-diagonal negative Laplacian, and all
//! integrals use the rectangle rule with weight `h^n` on interior nodes.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of interior nodes.
pub const DEFAULT_MAX_NODES: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDomain {
    dimension: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    nodes_per_axis: Vec<usize>,
    spacing: Vec<f64>,
}

impl GridDomain {
    /// Builds a grid with the default node cap.
    pub fn new(dimension: usize, extents: &[(f64, f64)], nodes_per_axis: &[usize]) -> Result<Self> {
        Self::with_cap(dimension, extents, nodes_per_axis, DEFAULT_MAX_NODES)
    }

    pub fn with_cap(
        dimension: usize,
        extents: &[(f64, f64)],
        nodes_per_axis: &[usize],
        max_nodes: usize,
    ) -> Result<Self> {
        if dimension != 1 && dimension != 2 {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1 or 2, got {dimension}"
            )));
        }
        if extents.len() != dimension || nodes_per_axis.len() != dimension {
            return Err(Error::InvalidGrid(format!(
                "expected {dimension} extents and node counts, got {} and {}",
                extents.len(),
                nodes_per_axis.len()
            )));
        }
        let mut spacing = Vec::with_capacity(dimension);
        for (axis, (&(lo, hi), &n)) in extents.iter().zip(nodes_per_axis).enumerate() {
            if n < 2 {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis}: need at least 2 interior nodes, got {n}"
                )));
            }
            if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis}: degenerate or inverted extent ({lo}, {hi})"
                )));
            }
            spacing.push((hi - lo) / (n as f64 + 1.0));
        }
        let total: usize = nodes_per_axis.iter().product();
        if total > max_nodes {
            return Err(Error::InvalidGrid(format!(
                "{total} interior nodes exceeds the cap of {max_nodes}"
            )));
        }
        Ok(Self {
            dimension,
            lower: extents.iter().map(|e| e.0).collect(),
            upper: extents.iter().map(|e| e.1).collect(),
            nodes_per_axis: nodes_per_axis.to_vec(),
            spacing,
        })
    }

    /// The unit interval `(0, 1)` with `n` interior nodes.
    pub fn unit_interval(n: usize) -> Result<Self> {
        Self::new(1, &[(0.0, 1.0)], &[n])
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn nodes_per_axis(&self) -> &[usize] {
        &self.nodes_per_axis
    }

    pub fn extents(&self) -> Vec<(f64, f64)> {
        self.lower.iter().copied().zip(self.upper.iter().copied()).collect()
    }

    /// Number of interior nodes `N`.
    pub fn len(&self) -> usize {
        self.nodes_per_axis.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Length of a [`VectorField2`] on this grid.
    pub fn field_len(&self) -> usize {
        2 * self.len()
    }

    /// Rectangle-rule quadrature weight `h^n`.
    pub fn quadrature_weight(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Lebesgue measure of the domain.
    pub fn measure(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| hi - lo)
            .product()
    }

    /// Euclidean diameter of the domain.
    pub fn diameter(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| (hi - lo).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Coordinates of interior node `index`; unused axes are zero.
    pub fn node(&self, index: usize) -> [f64; 2] {
        let mut x = [0.0; 2];
        let mut rest = index;
        for axis in 0..self.dimension {
            let n = self.nodes_per_axis[axis];
            let i = rest % n;
            rest /= n;
            x[axis] = self.lower[axis] + (i as f64 + 1.0) * self.spacing[axis];
        }
        x
    }

    pub fn nodes(&self) -> Vec<[f64; 2]> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    /// Dense matrix of the second-order centered stencil for `−Δ` on interior
    /// nodes (tridiagonal in 1D, five-point in 2D).
    pub fn laplacian(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut lap = DMatrix::zeros(n, n);
        let mut stride = 1;
        for axis in 0..self.dimension {
            let h2 = self.spacing[axis] * self.spacing[axis];
            let count = self.nodes_per_axis[axis];
            for idx in 0..n {
                lap[(idx, idx)] += 2.0 / h2;
                let i = (idx / stride) % count;
                if i > 0 {
                    lap[(idx, idx - stride)] -= 1.0 / h2;
                }
                if i + 1 < count {
                    lap[(idx, idx + stride)] -= 1.0 / h2;
                }
            }
            stride *= count;
        }
        lap
    }

    /// Block-diagonal `diag(L, L)` acting on [`VectorField2`] values.
    pub fn block_laplacian(&self) -> DMatrix<f64> {
        let lap = self.laplacian();
        let n = self.len();
        let mut block = DMatrix::zeros(2 * n, 2 * n);
        block.view_mut((0, 0), (n, n)).copy_from(&lap);
        block.view_mut((n, n), (n, n)).copy_from(&lap);
        block
    }

    /// Closed-form eigenvalues of the 1D Dirichlet stencil,
    /// `(2/h²)(1 − cos(jπ/(n+1)))`, ascending. Only meaningful in 1D.
    pub fn closed_form_eigenvalues_1d(&self) -> Vec<f64> {
        let h = self.spacing[0];
        let n = self.nodes_per_axis[0];
        (1..=n)
            .map(|j| 2.0 / (h * h) * (1.0 - (j as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos()))
            .collect()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.field_len() {
            return Err(Error::DomainMismatch {
                expected: self.field_len(),
                actual: len,
            });
        }
        Ok(())
    }

    /// Discrete `⟨z, w⟩ = ∫ ∇z·∇w dx`.
    pub fn h10_inner(&self, z: &VectorField2, w: &VectorField2) -> Result<f64> {
        self.check_len(z.len())?;
        self.check_len(w.len())?;
        let n = self.len();
        let lap = self.laplacian();
        let mut acc = 0.0;
        for block in 0..2 {
            let zb = z.values.rows(block * n, n);
            let wb = w.values.rows(block * n, n);
            acc += zb.dot(&(&lap * wb));
        }
        Ok(self.quadrature_weight() * acc)
    }

    pub fn h10_norm(&self, z: &VectorField2) -> Result<f64> {
        Ok(self.h10_inner(z, z)?.max(0.0).sqrt())
    }

    /// Quadrature approximation of `(∫ |z|^p dx)^{1/p}` with `|·|` the
    /// pointwise Euclidean norm of `(u, v)`; `p = ∞` gives the max norm.
    pub fn lp_norm(&self, z: &VectorField2, p: f64) -> Result<f64> {
        self.check_len(z.len())?;
        if p.is_nan() || p < 2.0 {
            return Err(Error::InvalidArgument(format!(
                "Lebesgue exponent must be at least 2, got {p}"
            )));
        }
        let magnitudes = (0..self.len()).map(|i| z.at(i)).map(|[u, v]| u.hypot(v));
        if p.is_infinite() {
            return Ok(magnitudes.fold(0.0, f64::max));
        }
        let sum: f64 = magnitudes.map(|m| m.powf(p)).sum();
        Ok((self.quadrature_weight() * sum).powf(1.0 / p))
    }
}

/// A discretized pair `z = (u, v)` of grid functions, stored as `(u-block, v-block)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField2 {
    values: DVector<f64>,
}

impl VectorField2 {
    pub fn zeros(grid: &GridDomain) -> Self {
        Self {
            values: DVector::zeros(grid.field_len()),
        }
    }

    pub fn from_vector(grid: &GridDomain, values: DVector<f64>) -> Result<Self> {
        grid.check_len(values.len())?;
        Ok(Self { values })
    }

    /// Samples `f(x)` at every interior node.
    pub fn from_fn(grid: &GridDomain, mut f: impl FnMut([f64; 2]) -> [f64; 2]) -> Self {
        let n = grid.len();
        let mut values = DVector::zeros(2 * n);
        for i in 0..n {
            let [u, v] = f(grid.node(i));
            values[i] = u;
            values[n + i] = v;
        }
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(u, v)` at node `i`.
    pub fn at(&self, i: usize) -> [f64; 2] {
        let n = self.values.len() / 2;
        [self.values[i], self.values[n + i]]
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.values
    }
}
