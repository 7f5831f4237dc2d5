//! Exact harmonic calculus on the Sierpinski gasket and its left half.
//!
//! This crate solves boundary value problems on the half gasket in closed
//! form, computes energies, normal derivatives and the
//! Dirichlet-to-Neumann map on the symmetry axis, evaluates Green's
//! functions, converts between boundary data and interior values via
//! trace/extension operators, and enumerates graph eigenvalues with their
//! symmetry classes.  All core computations run over exact rationals by
//! default, with an optional f64 backend.
//!
//! Modules:
//! * [`gasket`] — vertex addressing, reflection symmetry, level graphs;
//! * [`seq`] — exact sequences with geometric/polynomial tails;
//! * [`harmonic`] — harmonic extension, energy forms, normal derivatives;
//! * [`bvp`] — closed-form boundary value solutions and graph oracles;
//! * [`flux`] — axis flux sequences and the Dirichlet-to-Neumann map;
//! * [`green`] — Green's functions and Poisson solvers;
//! * [`trace`] — boundary trace decomposition, extension operators;
//! * [`spectra`] — graph spectra, symmetry splitting, eigenvalue census;
//! * [`cli`] — the `halfgasket` command-line interface.

pub mod bvp;
pub mod cli;
pub mod error;
pub mod flux;
pub mod gasket;
pub mod green;
pub mod harmonic;
pub mod linalg;
pub mod scalar;
pub mod seq;
pub mod spectra;
pub mod trace;

pub use error::{Error, Result};
pub use scalar::{Rational, Scalar};
