//! Fractal zeta functions and complex dimensions.
//!
//! The crate evaluates distance, tube, relative, geometric and spectral zeta
//! functions of bounded sets, locates their poles and residues, and
//! estimates Minkowski dimensions and contents from tube-function samples.
//!
//! * [`model`]: descriptors for sets, drums, strings and reports.
//! * [`tube`]: tube functions `t -> |A_t|`, exact or rasterized.
//! * [`numeric`]: first-principles zeta evaluators used as the verification backbone.
//! * [`forms`]: closed-form meromorphic continuations with pole sets and residues.
//! * [`analysis`]: residues by contour quadrature, pole scans, dimension and oscillation estimators.
//! * [`quasiperiodic`]: unions of Cantor sets with rationally independent periods.
//! * [`spectral`]: spectral zeta functions, counting functions and Weyl remainders.
//! * [`verify`]: the reproduction suite.

// `!(x > y)` is how NaN inputs are rejected throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod convergence;
pub mod error;
pub mod forms;
pub mod model;
pub mod numeric;
pub mod oracles;
pub mod quad;
pub mod quasiperiodic;
pub mod special;
pub mod spectral;
pub mod tube;
pub mod verify;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex64;
