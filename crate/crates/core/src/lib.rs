//! Numerical laboratory for the variational structure of the Ginzburg-Landau
//! and abelian Yang-Mills-Higgs functionals on spheres and complex projective
//! spaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] builds icosphere meshes, finite-element operators and
//!   analytic vector-field jets with their flows.
//! * [`linalg`] holds the sparse matrix type, the Cholesky wrapper and the
//!   iterative solvers shared by the PDE modules.
//! * [`gl`] and [`ymh`] implement energies, derivatives, solvers and spectra.
//! * [`pointlab`] checks trace identities pointwise in a single tangent space.
//! * [`harness`] wires everything into named experiments and reports.

pub mod error;
pub mod geometry;
pub mod gl;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod pointlab;
pub mod rng;
pub mod ymh;

pub use error::{Result, StabError};
