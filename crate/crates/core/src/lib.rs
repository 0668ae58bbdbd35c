//! Dyadic square subdivisions driven by a log-correlated Gaussian field.
//!
//! A dyadic square `S` carries the mass `M(S) = exp(ĥ_{|S|/2}(v_S)) |S|^Q`.
//! For a threshold `ε`, the tiling of a domain `U` consists of the maximal
//! dyadic squares of `U` with mass at most `ε`. The background charge `Q` is
//! tied to the matter central charge by `c_M = 25 − 6 Q²`; for `Q < 2`
//! subdivision never terminates near thick points of the field, and those
//! cells are reported as unresolved at a finite depth cap.
//!
//! Modules, bottom-up:
//!
//! * [`params`]: `c_M`, `Q`, `γ`.
//! * [`field`]: field oracles (exact Cholesky, lazy octave synthesis, stubs)
//!   and covariance kernels.
//! * [`tiling`]: masses, eager and lazy subdivision, thick-point estimates.
//! * [`graph`]: square adjacency, graph distances and ball profiles.
//! * [`fractal`]: deterministic test sets and their dyadic coverings.
//! * [`experiment`]: ε-ladders, replicas, exponent fits.
//! * [`config`], [`io`]: run configuration, CSV and tiling files.

pub mod config;
pub mod dyadic;
pub mod error;
pub mod experiment;
pub mod field;
pub mod fractal;
pub mod graph;
pub mod io;
pub mod params;
pub mod rng;
pub mod special;
pub mod tiling;

pub use dyadic::{DyadicPoint, DyadicSquare, Point};
pub use error::{Error, Result};
pub use field::{Backend, Field, FieldNode, FieldRealization};
pub use params::Params;
pub use tiling::Tiling;

/// Crate version embedded in every output file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
