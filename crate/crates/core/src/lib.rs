//! Radial solver and verification toolkit for the degenerate Robin problem
//!
//! ```text
//! -div(b(|u|) grad u) = f   in B_R,      du/dnu + beta u = 0   on dB_R,
//! b(s) = (1+s)^(-theta),  0 < theta <= 1.
//! ```
//!
//! * [`coefficients`]: `b`, its primitive `B`, `B^{-1}`, the boundary nonlinearity `F`.
//! * [`regimes`]: which existence regime a datum `f in L^q` falls into, with its exponents.
//! * [`radial_oracle`]: closed-form radial solutions for `f = A |x|^{-gamma}`, `gamma < 2`.
//! * [`fd_solver`]: truncated, frozen-coefficient radial solver.
//! * [`norms`] and [`estimates`]: weighted norms on radial grids and the estimate checks.
//! * [`cli`]: the `degrobin` command line.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coefficients;
pub mod error;
pub mod estimates;
pub mod fd_solver;
pub mod grid;
pub mod norms;
pub mod radial_oracle;
pub mod regimes;
pub mod source;
pub mod tridiag;

pub use coefficients::CoefficientFamily;
pub use error::{Error, Result};
pub use fd_solver::{picard_solve, ProblemSpec, SolveReport};
pub use grid::RadialGridFunction;
pub use radial_oracle::{RadialClosedForm, RadialExampleSpec};
pub use regimes::{classify, Regime, RegimeReport};
