//! Symmetric-matrix algebra of the three-well problem.

mod compat;
mod determined;
mod saint_venant;
pub mod wells;

pub use compat::{compatible, compatible2, compatible3, is_t3, sym_outer, CompatCertificate, SymMat, T3Certificate, EIG_TOL};
pub use determined::{determinedness_polynomial, difference_values, DifferenceSet, Polynomial, COINCIDENCE_TOL};
pub use saint_venant::{compatibility_residual, CompatibilityResidual};
pub use wells::{twin, wells_from_etas, RankOneResiduals, WellOrdering, WellSystem, TWIN_DIRECTIONS, TWIN_SETS};
