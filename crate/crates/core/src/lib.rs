//! Numerical laboratory for the three-well T3 problem in linearized elasticity.
//!
//! The crate is organised bottom-up:
//!
//! - [`algebra`]: symmetric-matrix algebra, wells, compatibility certificates,
//!   T3 detection, determinedness polynomials and discrete Saint-Venant residuals.
//! - [`grid`]: periodic sample grids, fields and the 3D FFT used everywhere else.
//! - [`energy`]: elastic, surface and total energies plus the multiplier lower bound.
//! - [`laminate`]: the nested branching laminate and its energy scaling law.
//! - [`solver`]: entropy-regularized FFT fixed-point equilibrium solver.
//! - [`diagnostics`]: cone multipliers, the six-wave decomposition and lemma harnesses.
//! - [`io`]: legacy VTK and CSV writers.
//!
//! Well indices are zero-based throughout: `wells[0]` is e(1), `aux[0]` is J1.

// NaN-rejecting range checks read better negated
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

/// Version of this crate, recorded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod algebra;
pub mod diagnostics;
pub mod energy;
pub mod error;
pub mod grid;
pub mod io;
pub mod laminate;
pub mod solver;
pub mod tensor;

pub use algebra::{
    compatible, compatible2, compatible3, is_t3, sym_outer, wells_from_etas, CompatCertificate,
    DifferenceSet, Polynomial, SymMat, T3Certificate, WellOrdering, WellSystem,
};
pub use energy::{EnergyReport, PhaseField};
pub use error::{Error, Result};
pub use grid::{Grid3, ScalarField3, TensorField3};
pub use laminate::{LaminateTree, ScalingRow};
pub use solver::{IsotropicHooke, SolverConfig, SolverState};
pub use tensor::{SymMat2, SymMat3, Vec3};
