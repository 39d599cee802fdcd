//! Run configuration: TOML schema, validation and instance construction.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use saddle_core::problem::{
    hessian_at_origin, validate_model, ExprNonlinearity, FieldRole, MatrixField, Nonlinearity, NonlinearityModel,
    SampleSpec,
};
use saddle_core::reduction::{PairSampler, DEFAULT_INNER_MAX_ITER, DEFAULT_INNER_TOL};
use saddle_core::search::{SearchStrategy, TheoremCase};
use saddle_core::spectral::{normalize_resonance, resonance_shift, SplitSide};
use saddle_core::GridDomain;

use crate::CliError;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    /// Seed of every randomized step in the run.
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub case: TheoremCase,
    pub grid: GridSpec,
    pub ainf: FieldSpec,
    /// Monotonicity bound; derived from the family when omitted.
    #[serde(default)]
    pub beta: Option<FieldSpec>,
    pub nonlinearity: NonlinearitySpec,
    #[serde(default)]
    pub resonance: ResonanceSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub sampling: SamplingSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dimension: usize,
    pub extents: Vec<[f64; 2]>,
    pub nodes: Vec<usize>,
    #[serde(default)]
    pub max_nodes: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Identity,
    Diag { values: [f64; 2] },
    Constant { matrix: [[f64; 2]; 2] },
    /// Entries as expressions in `x1, x2`.
    Expr { e11: String, e12: String, e22: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearitySpec {
    Zero,
    /// `½ A∞ z·z` plus the radial log profile with quartic origin term.
    /// Without `a`, the origin weight is shifted so that the `m`-th
    /// eigenvalue of `A₀` is 1.
    LogQuartic {
        c: f64,
        q: f64,
        #[serde(default)]
        a: Option<f64>,
    },
    /// Potential in `x1, x2, u, v`; `A₀` is its Hessian at zero.
    Expr { potential: String, lambda: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResonanceSpec {
    /// Resonance index at infinity.
    pub k: usize,
    /// Resonance index at the origin.
    pub m: usize,
    /// Rescale `A∞` so that its `k`-th distinct eigenvalue is 1.
    pub normalize_ainf: bool,
}

impl Default for ResonanceSpec {
    fn default() -> Self {
        Self {
            k: 1,
            m: 1,
            normalize_ainf: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSpec {
    pub inner_tol: f64,
    pub inner_max_iter: usize,
    pub index_tol: f64,
    pub search: SearchStrategy,
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            inner_tol: DEFAULT_INNER_TOL,
            inner_max_iter: DEFAULT_INNER_MAX_ITER,
            index_tol: saddle_core::search::DEFAULT_INDEX_TOL,
            search: SearchStrategy::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingSpec {
    pub radii: usize,
    pub directions: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub node_stride: usize,
    pub pair_samples: usize,
    pub rays: usize,
    pub ray_radii: Vec<f64>,
}

impl Default for SamplingSpec {
    fn default() -> Self {
        let s = SampleSpec::default();
        Self {
            radii: s.radii,
            directions: s.directions,
            r_min: s.r_min,
            r_max: s.r_max,
            node_stride: s.node_stride,
            pair_samples: PairSampler::default().samples,
            rays: 16,
            ray_radii: vec![1.0, 3.0, 10.0, 30.0, 100.0],
        }
    }
}

fn invalid(key: &str, message: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("config key `{key}`: {message}"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        let config: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(invalid(
                "schema_version",
                format!("expected {CONFIG_SCHEMA_VERSION}, found {}", self.schema_version),
            ));
        }
        let g = &self.grid;
        if g.extents.len() != g.dimension || g.nodes.len() != g.dimension {
            return Err(invalid("grid", "extents and nodes need one entry per dimension"));
        }
        let s = &self.solver;
        for (key, v) in [
            ("solver.inner_tol", s.inner_tol),
            ("solver.index_tol", s.index_tol),
            ("solver.search.tolerance", s.search.tolerance),
            ("solver.search.separation", s.search.separation),
            ("solver.search.triviality", s.search.triviality),
        ] {
            if !(v > 0.0) {
                return Err(invalid(key, "must be positive"));
            }
        }
        if s.inner_max_iter == 0 || s.search.batch == 0 {
            return Err(invalid("solver", "iteration counts and batch size must be positive"));
        }
        let p = &self.sampling;
        if !(p.r_min > 0.0 && p.r_max > p.r_min) {
            return Err(invalid("sampling", "need 0 < r_min < r_max"));
        }
        if self.resonance.k == 0 || self.resonance.m == 0 {
            return Err(invalid("resonance", "indices start at 1"));
        }
        if let FieldSpec::Expr { e11, e12, e22 } = &self.ainf {
            for e in [e11, e12, e22] {
                saddle_core::expr::Expr::parse(e).map_err(|err| invalid("ainf", err))?;
            }
        }
        if let NonlinearitySpec::Expr { potential, lambda } = &self.nonlinearity {
            ExprNonlinearity::parse(potential).map_err(|err| invalid("nonlinearity.potential", err))?;
            if !(*lambda >= 0.0) {
                return Err(invalid("nonlinearity.lambda", "must be nonnegative"));
            }
        }
        Ok(())
    }

    pub fn sample_spec(&self) -> SampleSpec {
        let p = &self.sampling;
        SampleSpec {
            radii: p.radii,
            directions: p.directions,
            r_min: p.r_min,
            r_max: p.r_max,
            node_stride: p.node_stride,
            seed: derived_seed(self.seed, 1),
        }
    }

    pub fn pair_sampler(&self) -> PairSampler {
        PairSampler {
            samples: self.sampling.pair_samples,
            seed: derived_seed(self.seed, 2),
            ..PairSampler::default()
        }
    }

    /// Search strategy; the search itself consumes the run seed unchanged.
    pub fn strategy(&self) -> SearchStrategy {
        SearchStrategy {
            seed: self.seed,
            ..self.solver.search.clone()
        }
    }

    pub fn side(&self) -> SplitSide {
        match self.case {
            TheoremCase::St1I | TheoremCase::St1Ii => SplitSide::APlusCase,
            _ => SplitSide::AMinusCase,
        }
    }

    pub fn build(&self) -> Result<Instance, CliError> {
        let g = &self.grid;
        let extents: Vec<(f64, f64)> = g.extents.iter().map(|e| (e[0], e[1])).collect();
        let grid = match g.max_nodes {
            Some(cap) => GridDomain::with_cap(g.dimension, &extents, &g.nodes, cap),
            None => GridDomain::new(g.dimension, &extents, &g.nodes),
        }
        .map_err(|e| invalid("grid", e))?;
        let mut ainf = build_field(&self.ainf, FieldRole::Ainf).map_err(|e| invalid("ainf", e))?;
        ainf.check_positive_definite(&grid).map_err(|e| invalid("ainf", e))?;
        let k = self.resonance.k;
        let m = self.resonance.m;
        let mut normalization = None;
        if self.resonance.normalize_ainf {
            let (scaled, factor) = normalize_resonance(&ainf, k, &grid).map_err(|e| invalid("resonance.k", e))?;
            ainf = scaled;
            normalization = Some(factor);
        }
        let ainf_norm = ainf.sup_norm(&grid);
        let (mut model, profile) = match &self.nonlinearity {
            NonlinearitySpec::Zero => (NonlinearityModel::zero(), None),
            NonlinearitySpec::LogQuartic { c, q, a } => {
                let a = match a {
                    Some(a) => *a,
                    None => c + resonance_shift(&ainf, m, &grid).map_err(|e| invalid("resonance.m", e))? / 2.0,
                };
                (NonlinearityModel::log_quartic(ainf.clone(), *c, a, *q, ainf_norm), Some((*c, a, *q)))
            }
            NonlinearitySpec::Expr { potential, lambda } => {
                let f = ExprNonlinearity::parse(potential).map_err(|e| invalid("nonlinearity.potential", e))?;
                let mut model = NonlinearityModel::new(f.describe(), f, *lambda, ainf.clone(), ainf.clone());
                model.a0 = hessian_at_origin(model.potential.clone());
                (model, None)
            }
        };
        model.k = k;
        model.m = m;
        if let Some(spec) = &self.beta {
            model.beta = Some(build_field(spec, FieldRole::Beta).map_err(|e| invalid("beta", e))?);
        } else if let (SplitSide::APlusCase, Some((c, a, q))) = (self.side(), profile) {
            model.beta = Some(model.log_quartic_upper_beta(c, a, q));
        }
        validate_model(&model).map_err(|e| invalid("nonlinearity", e))?;
        Ok(Instance {
            grid,
            split_weight: ainf,
            model,
            normalization,
        })
    }
}

fn build_field(spec: &FieldSpec, role: FieldRole) -> saddle_core::Result<MatrixField> {
    Ok(match spec {
        FieldSpec::Identity => MatrixField::identity(role),
        FieldSpec::Diag { values } => MatrixField::diag(role, values[0], values[1]),
        FieldSpec::Constant { matrix } => MatrixField::constant(
            role,
            Matrix2::new(matrix[0][0], matrix[0][1], matrix[1][0], matrix[1][1]),
        ),
        FieldSpec::Expr { e11, e12, e22 } => MatrixField::from_exprs(role, e11, e12, e22)?,
    })
}

/// Independent stream for one stage of a run.
pub fn derived_seed(seed: u64, stage: u64) -> u64 {
    use rand::{RngCore, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stage);
    rng.next_u64()
}

/// A configured problem ready for the pipelines.
pub struct Instance {
    pub grid: GridDomain,
    /// `A∞` after normalization; its spectrum defines the split.
    pub split_weight: MatrixField,
    pub model: NonlinearityModel,
    pub normalization: Option<f64>,
}
