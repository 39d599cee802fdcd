//! The energy `Φ(z) = ½‖z‖² − ∫ F(x, z)` and its H¹₀ Riesz gradient
//! `∇Φ = 1 − K`, where `K(z)` solves `L K(z) = ∇F(x, z)` node by node.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{GridDomain, VectorField2};
use crate::problem::NonlinearityModel;

#[derive(Clone)]
pub struct FunctionalHandle {
    grid: GridDomain,
    model: NonlinearityModel,
    nodes: Vec<[f64; 2]>,
    lap: DMatrix<f64>,
    factor: Cholesky<f64, Dyn>,
}

impl std::fmt::Debug for FunctionalHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FunctionalHandle")
            .field("grid", &self.grid)
            .field("model", &self.model)
            .finish()
    }
}

impl FunctionalHandle {
    pub fn new(grid: GridDomain, model: NonlinearityModel) -> Result<Self> {
        let lap = grid.laplacian();
        let factor = Cholesky::new(lap.clone())
            .ok_or_else(|| Error::LinearSolve("grid Laplacian is not positive definite".into()))?;
        let nodes = grid.nodes();
        Ok(Self {
            grid,
            model,
            nodes,
            lap,
            factor,
        })
    }

    pub fn grid(&self) -> &GridDomain {
        &self.grid
    }

    pub fn model(&self) -> &NonlinearityModel {
        &self.model
    }

    pub fn dim(&self) -> usize {
        self.grid.field_len()
    }

    fn check(&self, z: &DVector<f64>) -> Result<()> {
        if z.len() != self.dim() {
            return Err(Error::DomainMismatch {
                expected: self.dim(),
                actual: z.len(),
            });
        }
        Ok(())
    }

    /// `L_b z` for the block Laplacian.
    pub fn apply_laplacian(&self, z: &DVector<f64>) -> DVector<f64> {
        let n = self.grid.len();
        let mut out = DVector::zeros(2 * n);
        out.rows_mut(0, n).copy_from(&(&self.lap * z.rows(0, n)));
        out.rows_mut(n, n).copy_from(&(&self.lap * z.rows(n, n)));
        out
    }

    /// `L_b⁻¹ r`.
    pub fn solve_laplacian(&self, r: &DVector<f64>) -> DVector<f64> {
        let n = self.grid.len();
        let mut out = DVector::zeros(2 * n);
        out.rows_mut(0, n).copy_from(&self.factor.solve(&r.rows(0, n).into_owned()));
        out.rows_mut(n, n).copy_from(&self.factor.solve(&r.rows(n, n).into_owned()));
        out
    }

    pub fn h10_norm(&self, z: &DVector<f64>) -> f64 {
        (self.grid.quadrature_weight() * z.dot(&self.apply_laplacian(z))).max(0.0).sqrt()
    }

    /// Node-wise `∇F(x_i, z_i)` stacked as a field vector.
    pub fn load(&self, z: &DVector<f64>) -> DVector<f64> {
        let n = self.grid.len();
        let mut g = DVector::zeros(2 * n);
        for (i, x) in self.nodes.iter().enumerate() {
            let [gu, gv] = self.model.gradient(*x, [z[i], z[n + i]]);
            g[i] = gu;
            g[n + i] = gv;
        }
        g
    }

    /// Quadrature of `F(x, z(x))`.
    pub fn potential_integral(&self, z: &DVector<f64>) -> f64 {
        let n = self.grid.len();
        let sum: f64 = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, x)| self.model.value(*x, [z[i], z[n + i]]))
            .sum();
        self.grid.quadrature_weight() * sum
    }

    /// `Φ(z)` on a raw field vector.
    pub fn value(&self, z: &DVector<f64>) -> f64 {
        0.5 * self.grid.quadrature_weight() * z.dot(&self.apply_laplacian(z)) - self.potential_integral(z)
    }

    /// `K(z) = L_b⁻¹ ∇F(·, z)`.
    pub fn compact_part(&self, z: &DVector<f64>) -> DVector<f64> {
        self.solve_laplacian(&self.load(z))
    }

    /// `∇Φ(z) = z − K(z)` on a raw field vector.
    pub fn gradient(&self, z: &DVector<f64>) -> DVector<f64> {
        z - self.compact_part(z)
    }

    pub fn phi_value(&self, z: &VectorField2) -> Result<f64> {
        self.check(z.as_vector())?;
        Ok(self.value(z.as_vector()))
    }

    pub fn phi_gradient(&self, z: &VectorField2) -> Result<VectorField2> {
        self.check(z.as_vector())?;
        VectorField2::from_vector(&self.grid, self.gradient(z.as_vector()))
    }

    /// `‖∇Φ(z)‖` in the H¹₀ norm.
    pub fn residual_norm(&self, z: &VectorField2) -> Result<f64> {
        self.check(z.as_vector())?;
        Ok(self.h10_norm(&self.gradient(z.as_vector())))
    }

    /// Largest `‖K(z)‖` over random `z` with `‖z‖ ≤ radius`; finite values
    /// reflect that `K` maps bounded sets to bounded sets.
    pub fn compact_part_bound(&self, radius: f64, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sup: f64 = 0.0;
        for _ in 0..samples {
            let z = DVector::from_fn(self.dim(), |_, _| rng.gen_range(-1.0..1.0));
            let nz = self.h10_norm(&z);
            if nz == 0.0 {
                continue;
            }
            let t: f64 = rng.gen_range(0.0..=1.0);
            let z = z * (radius * t / nz);
            sup = sup.max(self.h10_norm(&self.compact_part(&z)));
        }
        sup
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{FieldRole, MatrixField};
    use crate::spectral::{normalize_resonance, solve_weighted_eigenproblem};

    fn random_field(dim: usize, seed: u64) -> DVector<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn zero_potential_is_dirichlet_energy() {
        let g = GridDomain::unit_interval(15).unwrap();
        let h = FunctionalHandle::new(g.clone(), NonlinearityModel::zero()).unwrap();
        let z = VectorField2::from_vector(&g, random_field(30, 1)).unwrap();
        let norm = g.h10_norm(&z).unwrap();
        assert!((h.phi_value(&z).unwrap() - 0.5 * norm * norm).abs() < 1e-12 * norm * norm);
        assert_eq!(h.phi_gradient(&z).unwrap(), z);
        assert!((h.residual_norm(&z).unwrap() - norm).abs() < 1e-12 * norm);
        let zero = VectorField2::zeros(&g);
        assert_eq!(h.phi_value(&zero).unwrap(), 0.0);
        assert_eq!(h.residual_norm(&zero).unwrap(), 0.0);
    }

    #[test]
    fn resonant_quadratic_vanishes_on_eigenfunction() {
        let g = GridDomain::unit_interval(31).unwrap();
        let (ainf, _) = normalize_resonance(&MatrixField::diag(FieldRole::Ainf, 1.0, 2.5), 2, &g).unwrap();
        let norm = ainf.sup_norm(&g);
        let h = FunctionalHandle::new(g.clone(), NonlinearityModel::quadratic(ainf.clone(), norm)).unwrap();
        let s = solve_weighted_eigenproblem(&g, &ainf, 4).unwrap();
        let e = s.eigenspace(2).unwrap().column(0).into_owned();
        let z = VectorField2::from_vector(&g, e).unwrap();
        assert!(h.phi_value(&z).unwrap().abs() < 1e-8);
        assert!(h.residual_norm(&z).unwrap() < 1e-8);
    }

    #[test]
    fn gradient_is_riesz_representative() {
        let g = GridDomain::unit_interval(20).unwrap();
        let (ainf, _) = normalize_resonance(&MatrixField::diag(FieldRole::Ainf, 1.0, 3.0), 2, &g).unwrap();
        let norm = ainf.sup_norm(&g);
        let model = NonlinearityModel::log_quartic(ainf, 1.0, 3.0, 4.0, norm);
        let h = FunctionalHandle::new(g.clone(), model).unwrap();
        for seed in 0..10 {
            let z = random_field(40, seed) * 2.0;
            let w = random_field(40, seed + 100);
            let eps = 1e-5;
            let fd = (h.value(&(&z + &w * eps)) - h.value(&(&z - &w * eps))) / (2.0 * eps);
            let grad = h.gradient(&z);
            let inner = g.quadrature_weight() * grad.dot(&h.apply_laplacian(&w));
            assert!((fd - inner).abs() <= 1e-6 * inner.abs().max(1.0), "seed {seed}: {fd} vs {inner}");
        }
    }

    #[test]
    fn compact_part_is_bounded() {
        let g = GridDomain::unit_interval(10).unwrap();
        let model = NonlinearityModel::log_quartic(MatrixField::identity(FieldRole::Ainf), 1.0, 0.0, 0.0, 1.0);
        let h = FunctionalHandle::new(g, model).unwrap();
        let b = h.compact_part_bound(10.0, 50, 3);
        assert!(b.is_finite() && b > 0.0);
    }
}
