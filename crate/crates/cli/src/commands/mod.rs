//! Subcommand implementations.

mod check;
mod eigen;
mod report;
mod solve;
mod verify;

pub use check::check;
pub use eigen::eigen;
pub use report::report;
pub use solve::solve;
pub use verify::{verify, Suite};

use saddle_core::spectral::{solve_weighted_eigenproblem, Spectrum};
use saddle_core::GridDomain;
use saddle_core::problem::MatrixField;

use crate::CliError;

/// The complete spectrum of a weight field.
fn full_spectrum(grid: &GridDomain, weight: &MatrixField) -> Result<Spectrum, CliError> {
    Ok(solve_weighted_eigenproblem(grid, weight, grid.field_len())?)
}
