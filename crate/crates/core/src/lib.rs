//! Generalized hyperbolic circle packings with conical singularities on
//! polygonal cell complexes.
//!
//! Each face of a [`CellComplex`] carries one generalized circle per vertex
//! (circle, horocycle or hypercycle, by geodesic curvature `k`) and a dual
//! circle meeting all of them orthogonally. The forward map sends the
//! per-vertex log-curvatures `s = ln k` to the total geodesic curvatures
//! `L`; [`admissibility`] decides which targets `L̂` are reachable, and
//! [`solver`] finds the unique state reaching an admissible target by the
//! combinatorial p-th Calabi flow or by Newton's method.
//!
//! ```
//! use hyperpack::{assembly, complex::CellComplex, PackingState};
//!
//! let tri = CellComplex::from_indices(3, &[(vec![0, 1, 2], 0.0)]).unwrap();
//! let report = assembly::curvatures(&tri, &PackingState::zeros(3)).unwrap();
//! assert!((report.total[0] - 1.0).abs() < 1e-12);
//! ```

// `!(x > 0.0)` is the NaN-rejecting form throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod admissibility;
pub mod assembly;
pub mod cli;
pub mod complex;
mod error;
pub mod face;
pub mod io;
mod roots;
pub mod solver;

pub use assembly::{CurvatureReport, PackingState, Weights};
pub use complex::{CellComplex, FaceSpec, Targets};
pub use error::{Error, Result};
pub use face::{FaceConfig, FacePacking};
pub use roots::NewtonBracket;
pub use solver::{Method, SolveConfig, Solution, Status, StepRule, Integrator};
