//! Shipped model functionals with known critical groups.

use serde::{Deserialize, Serialize};

use super::{ModelFunctional, ModelSplit};
use crate::spectral::SplitSide;

/// A split model with its examined critical point.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub model: ModelFunctional,
    /// `X⁻` coordinates of the critical point of `φ`, or the center of the
    /// box for groups at infinity.
    pub reduced_point: Vec<f64>,
    pub box_radius: f64,
    /// Sublevel for groups at infinity, below every critical value.
    pub alpha: f64,
    /// The critical point is degenerate.
    pub degenerate: bool,
    /// Which identity the entry exercises, for dual-split models.
    pub variant: Option<TheoremAVariant>,
}

/// The three statements relating groups of `f` and `φ` under either condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremAVariant {
    /// `C_q(f, ∞) ≅ C_q(φ, ∞)` in the `A⁺` case.
    InfinityPlus,
    /// `C_q(f, ∞) ≅ C_{q−μ}(φ, ∞)` in the `A⁻` case.
    InfinityMinus,
    /// `C_q(f, v̄ + ψ(v̄)) ≅ C_q(φ, v̄)` in the `A⁺` case.
    PointPlus,
}

impl TheoremAVariant {
    pub fn side(self) -> SplitSide {
        match self {
            TheoremAVariant::InfinityMinus => SplitSide::AMinusCase,
            _ => SplitSide::APlusCase,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TheoremAVariant::InfinityPlus => "i",
            TheoremAVariant::InfinityMinus => "ii",
            TheoremAVariant::PointPlus => "iii",
        }
    }
}

fn split(model: ModelFunctional, n_minus: usize, side: SplitSide) -> ModelFunctional {
    let dim = model.dim();
    model
        .with_split(ModelSplit::leading(dim, n_minus, side))
        .expect("catalog splits are valid")
}

fn entry(model: ModelFunctional, reduced_point: Vec<f64>, degenerate: bool) -> CatalogEntry {
    CatalogEntry {
        model,
        reduced_point,
        box_radius: 1.0,
        alpha: -1.0,
        degenerate,
        variant: None,
    }
}

/// `A⁻` models with `μ ∈ {1, 2}`; the first coordinates span `X⁻`.
pub fn shift_models() -> Vec<CatalogEntry> {
    let minus = SplitSide::AMinusCase;
    vec![
        entry(
            split(
                ModelFunctional::new("saddle", 2, |x| x[0] * x[0] - x[1] * x[1], |x| vec![2.0 * x[0], -2.0 * x[1]]),
                1,
                minus,
            ),
            vec![0.0],
            false,
        ),
        entry(
            split(
                ModelFunctional::new(
                    "quartic_fiber",
                    2,
                    |x| x[0].powi(4) - x[1] * x[1],
                    |x| vec![4.0 * x[0].powi(3), -2.0 * x[1]],
                ),
                1,
                minus,
            ),
            vec![0.0],
            true,
        ),
        entry(
            split(
                ModelFunctional::new(
                    "quartic_coupled_fiber",
                    2,
                    |x| x[0].powi(4) - x[1] * x[1] - 2.0 * x[0] * x[1],
                    |x| vec![4.0 * x[0].powi(3) - 2.0 * x[1], -2.0 * x[1] - 2.0 * x[0]],
                ),
                1,
                minus,
            ),
            vec![0.0],
            false,
        ),
        entry(
            split(
                ModelFunctional::new(
                    "monkey_fiber",
                    3,
                    |x| x[0].powi(3) - 3.0 * x[0] * x[1] * x[1] - x[2] * x[2],
                    |x| {
                        vec![
                            3.0 * x[0] * x[0] - 3.0 * x[1] * x[1],
                            -6.0 * x[0] * x[1],
                            -2.0 * x[2],
                        ]
                    },
                ),
                2,
                minus,
            ),
            vec![0.0, 0.0],
            true,
        ),
        entry(
            split(
                ModelFunctional::new(
                    "minimum_two_fibers",
                    3,
                    |x| x[0] * x[0] - x[1] * x[1] - x[2] * x[2] + x[0] * x[1],
                    |x| vec![2.0 * x[0] + x[1], -2.0 * x[1] + x[0], -2.0 * x[2]],
                ),
                1,
                minus,
            ),
            vec![0.0],
            false,
        ),
        entry(
            split(
                ModelFunctional::new(
                    "negative_quartic_two_fibers",
                    3,
                    |x| -x[0].powi(4) - x[1] * x[1] - x[2] * x[2],
                    |x| vec![-4.0 * x[0].powi(3), -2.0 * x[1], -2.0 * x[2]],
                ),
                1,
                minus,
            ),
            vec![0.0],
            true,
        ),
    ]
}

fn with_variant(mut e: CatalogEntry, variant: TheoremAVariant, box_radius: f64, alpha: f64) -> CatalogEntry {
    e.variant = Some(variant);
    e.box_radius = box_radius;
    e.alpha = alpha;
    e
}

/// Models for the three statements relating groups of `f` and `φ`.
pub fn dual_split_models() -> Vec<CatalogEntry> {
    let plus = SplitSide::APlusCase;
    let minus = SplitSide::AMinusCase;
    vec![
        with_variant(
            entry(
                split(
                    ModelFunctional::new(
                        "coercive_quartic",
                        2,
                        |x| x[0].powi(4) + x[1] * x[1],
                        |x| vec![4.0 * x[0].powi(3), 2.0 * x[1]],
                    ),
                    1,
                    plus,
                ),
                vec![0.0],
                true,
            ),
            TheoremAVariant::InfinityPlus,
            2.0,
            -1.0,
        ),
        with_variant(
            entry(
                split(
                    ModelFunctional::new(
                        "convex_fiber_saddle",
                        2,
                        |x| -x[0] * x[0] + x[1] * x[1] + 0.5 * x[0] * x[1],
                        |x| vec![-2.0 * x[0] + 0.5 * x[1], 2.0 * x[1] + 0.5 * x[0]],
                    ),
                    1,
                    plus,
                ),
                vec![0.0],
                false,
            ),
            TheoremAVariant::InfinityPlus,
            2.0,
            -2.0,
        ),
        with_variant(
            entry(
                split(
                    ModelFunctional::new(
                        "concave",
                        2,
                        |x| -x[0] * x[0] - x[1] * x[1],
                        |x| vec![-2.0 * x[0], -2.0 * x[1]],
                    ),
                    1,
                    minus,
                ),
                vec![0.0],
                false,
            ),
            TheoremAVariant::InfinityMinus,
            2.0,
            -2.0,
        ),
        with_variant(
            entry(
                split(
                    ModelFunctional::new(
                        "coercive_two_fibers",
                        3,
                        |x| x[0] * x[0] - x[1] * x[1] - x[2] * x[2],
                        |x| vec![2.0 * x[0], -2.0 * x[1], -2.0 * x[2]],
                    ),
                    1,
                    minus,
                ),
                vec![0.0],
                false,
            ),
            TheoremAVariant::InfinityMinus,
            2.0,
            -2.0,
        ),
        with_variant(
            entry(
                split(
                    ModelFunctional::new(
                        "double_well_convex_fiber",
                        2,
                        |x| (x[0] * x[0] - 1.0).powi(2) + x[1] * x[1],
                        |x| vec![4.0 * x[0] * (x[0] * x[0] - 1.0), 2.0 * x[1]],
                    ),
                    1,
                    plus,
                ),
                vec![1.0],
                false,
            ),
            TheoremAVariant::PointPlus,
            0.5,
            -1.0,
        ),
        with_variant(
            entry(
                split(
                    ModelFunctional::new(
                        "monkey_convex_fiber",
                        3,
                        |x| x[0].powi(3) - 3.0 * x[0] * x[1] * x[1] + x[2] * x[2] + x[0] * x[0] * x[2],
                        |x| {
                            vec![
                                3.0 * x[0] * x[0] - 3.0 * x[1] * x[1] + 2.0 * x[0] * x[2],
                                -6.0 * x[0] * x[1],
                                2.0 * x[2] + x[0] * x[0],
                            ]
                        },
                    ),
                    2,
                    plus,
                ),
                vec![0.0, 0.0],
                true,
            ),
            TheoremAVariant::PointPlus,
            1.0,
            -1.0,
        ),
    ]
}

/// `(x² − 1)² + y²`: two minima and a saddle.
pub fn double_well() -> ModelFunctional {
    ModelFunctional::new(
        "double_well",
        2,
        |x| (x[0] * x[0] - 1.0).powi(2) + x[1] * x[1],
        |x| vec![4.0 * x[0] * (x[0] * x[0] - 1.0), 2.0 * x[1]],
    )
}

/// A sum `g(x) + h(y)` of functions of disjoint variables.
#[derive(Debug, Clone)]
pub struct KunnethEntry {
    pub product: ModelFunctional,
    pub first: ModelFunctional,
    pub second: ModelFunctional,
}

fn one_dim(id: &str, f: fn(f64) -> f64, df: fn(f64) -> f64) -> ModelFunctional {
    ModelFunctional::new(id, 1, move |x| f(x[0]), move |x| vec![df(x[0])])
}

fn product(first: ModelFunctional, second: ModelFunctional) -> KunnethEntry {
    let (a, b) = (first.clone(), second.clone());
    let (ga, gb) = (first.clone(), second.clone());
    let n1 = first.dim();
    let id = format!("{}+{}", first.id(), second.id());
    let product = ModelFunctional::new(
        id,
        first.dim() + second.dim(),
        move |x| a.value(&x[..n1]) + b.value(&x[n1..]),
        move |x| {
            let mut g = ga.gradient(&x[..n1]);
            g.extend(gb.gradient(&x[n1..]));
            g
        },
    );
    KunnethEntry { product, first, second }
}

/// Product models for the Künneth check.
pub fn kunneth_models() -> Vec<KunnethEntry> {
    let sq = || one_dim("x^2", |x| x * x, |x| 2.0 * x);
    let neg = || one_dim("-x^2", |x| -x * x, |x| -2.0 * x);
    let quartic = || one_dim("x^4", |x| x.powi(4), |x| 4.0 * x.powi(3));
    let neg_quartic = || one_dim("-x^4", |x| -x.powi(4), |x| -4.0 * x.powi(3));
    let cubic = || one_dim("x^3", |x| x.powi(3), |x| 3.0 * x * x);
    let monkey = ModelFunctional::new(
        "monkey",
        2,
        |x| x[0].powi(3) - 3.0 * x[0] * x[1] * x[1],
        |x| vec![3.0 * x[0] * x[0] - 3.0 * x[1] * x[1], -6.0 * x[0] * x[1]],
    );
    vec![
        product(sq(), sq()),
        product(sq(), neg()),
        product(neg(), neg_quartic()),
        product(quartic(), neg()),
        product(cubic(), sq()),
        product(monkey, neg()),
    ]
}
