use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix2, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Bindings, Expr};
use crate::grid::GridDomain;

/// Role a matrix field plays in the problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldRole {
    A0,
    Ainf,
    Beta,
    Other,
}

impl fmt::Display for FieldRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldRole::A0 => "A0",
            FieldRole::Ainf => "Ainf",
            FieldRole::Beta => "beta",
            FieldRole::Other => "other",
        })
    }
}

type Evaluator = Arc<dyn Fn([f64; 2]) -> Matrix2<f64> + Send + Sync>;

/// A continuous symmetric 2×2 matrix function on the domain.
///
/// Every constructor produces symmetric values: closures are symmetrized on
/// evaluation and expression fields take only the three independent entries.
#[derive(Clone)]
pub struct MatrixField {
    role: FieldRole,
    description: String,
    eval: Evaluator,
}

impl fmt::Debug for MatrixField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatrixField")
            .field("role", &self.role)
            .field("description", &self.description)
            .finish()
    }
}

impl MatrixField {
    pub fn from_fn(
        role: FieldRole,
        description: impl Into<String>,
        f: impl Fn([f64; 2]) -> Matrix2<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            role,
            description: description.into(),
            eval: Arc::new(move |x| {
                let m = f(x);
                (m + m.transpose()) * 0.5
            }),
        }
    }

    pub fn constant(role: FieldRole, m: Matrix2<f64>) -> Self {
        let description = format!("[[{}, {}], [{}, {}]]", m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        Self::from_fn(role, description, move |_| m)
    }

    pub fn identity(role: FieldRole) -> Self {
        Self::constant(role, Matrix2::identity())
    }

    pub fn diag(role: FieldRole, a: f64, b: f64) -> Self {
        Self::constant(role, Matrix2::new(a, 0.0, 0.0, b))
    }

    /// Field with entries `[[e11, e12], [e12, e22]]` given as expressions in `x1, x2`.
    pub fn from_exprs(role: FieldRole, e11: &str, e12: &str, e22: &str) -> Result<Self> {
        let parsed = [Expr::parse(e11)?, Expr::parse(e12)?, Expr::parse(e22)?];
        for e in &parsed {
            if e.depends_on(crate::expr::Var::U) || e.depends_on(crate::expr::Var::V) {
                return Err(Error::InvalidArgument(
                    "matrix field expressions may only use x1 and x2".into(),
                ));
            }
        }
        let description = format!("[[{e11}, {e12}], [{e12}, {e22}]]");
        Ok(Self::from_fn(role, description, move |x| {
            let b = Bindings { x, z: [0.0; 2] };
            let off = parsed[1].eval(&b);
            Matrix2::new(parsed[0].eval(&b), off, off, parsed[2].eval(&b))
        }))
    }

    pub fn role(&self) -> FieldRole {
        self.role
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn with_role(mut self, role: FieldRole) -> Self {
        self.role = role;
        self
    }

    pub fn at(&self, x: [f64; 2]) -> Matrix2<f64> {
        (self.eval)(x)
    }

    /// `c · A`.
    pub fn scaled(&self, c: f64) -> Self {
        let inner = self.eval.clone();
        Self {
            role: self.role,
            description: format!("{c} * ({})", self.description),
            eval: Arc::new(move |x| inner(x) * c),
        }
    }

    /// `A + c · I`.
    pub fn shifted(&self, c: f64) -> Self {
        let inner = self.eval.clone();
        Self {
            role: self.role,
            description: format!("({}) + {c} * I", self.description),
            eval: Arc::new(move |x| inner(x) + Matrix2::identity() * c),
        }
    }

    /// `A + B`, keeping the role of `self`.
    pub fn plus(&self, other: &MatrixField) -> Self {
        let (a, b) = (self.eval.clone(), other.eval.clone());
        Self {
            role: self.role,
            description: format!("({}) + ({})", self.description, other.description),
            eval: Arc::new(move |x| a(x) + b(x)),
        }
    }

    pub fn sample(&self, grid: &GridDomain) -> Vec<Matrix2<f64>> {
        grid.nodes().into_iter().map(|x| self.at(x)).collect()
    }

    /// Smallest eigenvalue over all grid nodes, with the node achieving it.
    pub fn min_eigenvalue(&self, grid: &GridDomain) -> (f64, usize) {
        self.sample(grid)
            .iter()
            .enumerate()
            .map(|(i, m)| (sym2_eigenvalues(m)[0], i))
            .fold((f64::INFINITY, 0), |acc, cur| if cur.0 < acc.0 { cur } else { acc })
    }

    /// Largest spectral norm over the grid nodes.
    pub fn sup_norm(&self, grid: &GridDomain) -> f64 {
        self.sample(grid)
            .iter()
            .map(|m| {
                let [lo, hi] = sym2_eigenvalues(m);
                lo.abs().max(hi.abs())
            })
            .fold(0.0, f64::max)
    }

    /// Errors with the offending node unless the field is positive definite
    /// at every grid node.
    pub fn check_positive_definite(&self, grid: &GridDomain) -> Result<()> {
        for (node, m) in self.sample(grid).iter().enumerate() {
            let min_eig = sym2_eigenvalues(m)[0];
            if !(min_eig > 0.0) {
                return Err(Error::NotPositiveDefinite {
                    label: self.role.to_string(),
                    node,
                    x: grid.node(node),
                    min_eig,
                });
            }
        }
        Ok(())
    }
}

/// Ascending eigenvalues of a symmetric 2×2 matrix.
pub fn sym2_eigenvalues(m: &Matrix2<f64>) -> [f64; 2] {
    let e = SymmetricEigen::new(*m).eigenvalues;
    if e[0] <= e[1] {
        [e[0], e[1]]
    } else {
        [e[1], e[0]]
    }
}

/// Outcome of comparing two matrix fields node by node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixOrder {
    /// `B − A` is positive semidefinite at every node.
    Leq,
    /// `Leq`, and `B − A` is positive definite on enough nodes.
    StrictPreceq,
    /// `B − A` fails to be positive semidefinite somewhere.
    Incomparable,
}

#[derive(Debug, Clone, Copy)]
pub struct OrderOptions {
    /// Eigenvalues of `B − A` within this (relative to the field scale) count as zero.
    pub tolerance: f64,
    /// Nodes on which `B − A` must be positive definite for the strict order.
    pub min_strict_nodes: usize,
}

impl Default for OrderOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            min_strict_nodes: 1,
        }
    }
}

/// Discrete version of `A ≤ B` and `A ⪯ B`; the strict order asks that
/// `B − A` be positive definite on at least `min_strict_nodes` grid nodes.
pub fn matrix_order_compare(
    a: &MatrixField,
    b: &MatrixField,
    grid: &GridDomain,
    options: OrderOptions,
) -> MatrixOrder {
    let sa = a.sample(grid);
    let sb = b.sample(grid);
    let scale = sa
        .iter()
        .chain(&sb)
        .map(|m| m.abs().max())
        .fold(1.0_f64, f64::max);
    let tol = options.tolerance * scale;
    let mut strict = 0;
    for (ma, mb) in sa.iter().zip(&sb) {
        let lo = sym2_eigenvalues(&(mb - ma))[0];
        if lo < -tol {
            return MatrixOrder::Incomparable;
        }
        if lo > tol {
            strict += 1;
        }
    }
    if strict >= options.min_strict_nodes {
        MatrixOrder::StrictPreceq
    } else {
        MatrixOrder::Leq
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridDomain {
        GridDomain::unit_interval(8).unwrap()
    }

    #[test]
    fn order_examples() {
        let g = grid();
        let o = OrderOptions::default();
        let id = MatrixField::identity(FieldRole::Other);
        assert_eq!(matrix_order_compare(&id, &id.scaled(2.0), &g, o), MatrixOrder::StrictPreceq);
        assert_eq!(matrix_order_compare(&id, &id, &g, o), MatrixOrder::Leq);
        let a = MatrixField::diag(FieldRole::Other, 1.0, 3.0);
        let b = MatrixField::diag(FieldRole::Other, 2.0, 2.0);
        assert_eq!(matrix_order_compare(&a, &b, &g, o), MatrixOrder::Incomparable);
    }

    #[test]
    fn strict_order_needs_enough_nodes() {
        let g = grid();
        let a = MatrixField::identity(FieldRole::Other);
        // B − A positive definite only where x > 0.8
        let b = MatrixField::from_fn(FieldRole::Other, "bump", |x| {
            Matrix2::identity() * (1.0 + (x[0] - 0.8).max(0.0))
        });
        assert_eq!(matrix_order_compare(&a, &b, &g, OrderOptions::default()), MatrixOrder::StrictPreceq);
        let strict_many = OrderOptions {
            min_strict_nodes: 5,
            ..OrderOptions::default()
        };
        assert_eq!(matrix_order_compare(&a, &b, &g, strict_many), MatrixOrder::Leq);
    }

    #[test]
    fn positive_definiteness_reports_node() {
        let g = grid();
        let f = MatrixField::from_fn(FieldRole::A0, "sign change", |x| {
            Matrix2::new(x[0] - 0.5, 0.0, 0.0, 1.0)
        });
        match f.check_positive_definite(&g) {
            Err(Error::NotPositiveDefinite { node, .. }) => assert_eq!(node, 0),
            other => panic!("unexpected {other:?}"),
        }
        assert!(MatrixField::identity(FieldRole::A0).check_positive_definite(&g).is_ok());
    }

    #[test]
    fn closures_are_symmetrized() {
        let f = MatrixField::from_fn(FieldRole::Other, "skew", |_| Matrix2::new(1.0, 2.0, 0.0, 1.0));
        let m = f.at([0.1, 0.0]);
        assert_eq!(m, m.transpose());
        assert_eq!(m[(0, 1)], 1.0);
    }

    #[test]
    fn expression_fields() {
        let f = MatrixField::from_exprs(FieldRole::Ainf, "1 + x1", "0.5", "2").unwrap();
        let m = f.at([0.5, 0.0]);
        assert_eq!(m, Matrix2::new(1.5, 0.5, 0.5, 2.0));
        assert!(MatrixField::from_exprs(FieldRole::Ainf, "u", "0", "1").is_err());
    }
}
