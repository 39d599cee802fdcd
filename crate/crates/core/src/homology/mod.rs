//! Critical groups of low-dimensional functionals by cubical homology over
//! GF(2), together with verifiers for the identities relating a functional to
//! its saddle point reduction.

mod catalog;
mod cubical;
mod groups;
mod verify;

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reduction::{ModelSplitFunctional, ReductionHandle, SplitFunctional};
use crate::spectral::SplitSide;

pub use catalog::{
    double_well, dual_split_models, kunneth_models, shift_models, CatalogEntry, KunnethEntry, TheoremAVariant,
};
pub use cubical::{relative_homology_z2, BettiVector, CubicalPair, CubicalOptions};
pub use groups::{
    brouwer_index, critical_groups, critical_groups_at_infinity, cubical_sublevel_pair, find_zeros, isolation_check,
    HomologyOptions, IndexOptions, IndexReport, InfinityGroups, IsolationReport, Zero, ZeroSearch,
};
pub use verify::{
    kunneth_check, morse_inequality_check, verify_index_shift, verify_shift_theorem, verify_theorem_a,
    IndexShiftReport, KunnethReport, MorseReport, ShiftReport, TheoremAReport, VerificationRecord,
};

/// Largest supported model dimension.
pub const MAX_MODEL_DIM: usize = 4;

/// A smooth function on `Rⁿ` with its gradient.
pub trait ScalarFunction: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
}

type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradientFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Coordinate partition of a model's variables into `X⁻` and `X⁺`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSplit {
    pub minus: Vec<usize>,
    pub plus: Vec<usize>,
    pub side: SplitSide,
}

impl ModelSplit {
    /// Leading `n_minus` coordinates span `X⁻`, the rest `X⁺`.
    pub fn leading(dim: usize, n_minus: usize, side: SplitSide) -> Self {
        Self {
            minus: (0..n_minus).collect(),
            plus: (n_minus..dim).collect(),
            side,
        }
    }

    /// The degree shift: `dim X⁺` in the `A⁻` case, `dim X⁻` otherwise.
    pub fn mu(&self) -> usize {
        match self.side {
            SplitSide::AMinusCase => self.plus.len(),
            SplitSide::APlusCase => self.minus.len(),
        }
    }
}

/// A model functional on `Rⁿ`, `n ≤ 4`, with an optional split.
#[derive(Clone)]
pub struct ModelFunctional {
    id: String,
    dim: usize,
    value: ValueFn,
    gradient: GradientFn,
    split: Option<ModelSplit>,
}

impl fmt::Debug for ModelFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelFunctional")
            .field("id", &self.id)
            .field("dim", &self.dim)
            .field("split", &self.split)
            .finish()
    }
}

impl ModelFunctional {
    /// Panics if `dim` is zero or exceeds [`MAX_MODEL_DIM`].
    pub fn new(
        id: impl Into<String>,
        dim: usize,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        assert!(
            (1..=MAX_MODEL_DIM).contains(&dim),
            "model dimension must be in 1..={MAX_MODEL_DIM}"
        );
        Self {
            id: id.into(),
            dim,
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            split: None,
        }
    }

    pub fn with_split(mut self, split: ModelSplit) -> Result<Self> {
        let mut seen = vec![false; self.dim];
        for &i in split.minus.iter().chain(&split.plus) {
            if i >= self.dim || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidArgument(format!(
                    "split of `{}` must partition 0..{}",
                    self.id, self.dim
                )));
            }
        }
        if seen.iter().any(|s| !s) || split.minus.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "split of `{}` must partition 0..{} with nonempty X⁻",
                self.id, self.dim
            )));
        }
        self.split = Some(split);
        Ok(self)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn split(&self) -> Option<&ModelSplit> {
        self.split.as_ref()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (self.gradient)(x)
    }

    /// Largest relative deviation between the gradient and central
    /// differences of the value at the given points.
    pub fn gradient_defect(&self, points: &[Vec<f64>]) -> f64 {
        let mut worst: f64 = 0.0;
        for x in points {
            let g = self.gradient(x);
            for i in 0..self.dim {
                let eps = 1e-6 * x[i].abs().max(1.0);
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += eps;
                xm[i] -= eps;
                let fd = (self.value(&xp) - self.value(&xm)) / (2.0 * eps);
                let scale = g.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
                worst = worst.max((fd - g[i]).abs() / scale);
            }
        }
        worst
    }
}

impl ScalarFunction for ModelFunctional {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        ModelFunctional::value(self, x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        ModelFunctional::gradient(self, x)
    }
}

/// The reduced functional `φ` of a split model, as a function on `X⁻`.
///
/// Points where the fiber solve fails evaluate to NaN, which the cubical
/// sampler treats as outside every sublevel set.
#[derive(Debug, Clone)]
pub struct ReducedModel {
    system: Arc<ModelSplitFunctional>,
    kappa: f64,
}

impl ReducedModel {
    pub fn new(model: &ModelFunctional, kappa: f64) -> Result<Self> {
        let system = ModelSplitFunctional::from_model(model.clone())?;
        // Validates kappa.
        ReductionHandle::from_arc(Arc::new(system.clone()), kappa)?;
        Ok(Self {
            system: Arc::new(system),
            kappa,
        })
    }

    fn handle(&self) -> ReductionHandle<ModelSplitFunctional> {
        ReductionHandle::from_arc(self.system.clone(), self.kappa).expect("kappa validated at construction")
    }

    pub fn system(&self) -> &ModelSplitFunctional {
        &self.system
    }

    /// `ψ(v)`.
    pub fn psi(&self, v: &[f64]) -> Result<Vec<f64>> {
        let v = DVector::from_column_slice(v);
        Ok(self.handle().solve_psi(&v)?.as_slice().to_vec())
    }

    /// The full point `v + ψ(v)` in model coordinates.
    pub fn full_point(&self, v: &[f64]) -> Result<Vec<f64>> {
        let dv = DVector::from_column_slice(v);
        let psi = self.handle().solve_psi(&dv)?;
        let z = self.system.add_plus(&self.system.lift_minus(&dv), &psi);
        Ok(z.as_slice().to_vec())
    }
}

impl ScalarFunction for ReducedModel {
    fn dim(&self) -> usize {
        self.system.minus_dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.handle()
            .reduced_value(&DVector::from_column_slice(x))
            .unwrap_or(f64::NAN)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match self.handle().reduced_gradient(&DVector::from_column_slice(x)) {
            Ok(g) => g.as_slice().to_vec(),
            Err(_) => vec![f64::NAN; x.len()],
        }
    }
}
