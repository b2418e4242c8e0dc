//! Numerical laboratory for the one-phase Bernoulli (Alt–Caffarelli) free
//! boundary problem.
//!
//! The crate minimizes the discrete energy
//!
//! ```text
//!   E(u) = sum over grid edges of |du/h|^2 h^d  +  lambda * |{u > 0}|
//! ```
//!
//! over fields with prescribed nonnegative boundary values, and turns the
//! structure theory of its minimizers into testable numerics:
//!
//! * [`geometry`] — domains, uniform grids, interior/boundary classification;
//! * [`boundary`] — boundary data, monotone data families, empirical moduli
//!   of continuity and Hölder seminorms;
//! * [`energy`] — the discrete functional and its single-cell minimization;
//! * [`solver`] — thresholded Gauss–Seidel relaxation with extreme solves and
//!   free-boundary diagnostics;
//! * [`oracle1d`] — exact 1D minimizers by candidate enumeration;
//! * [`radial`] — the closed-form annulus solution, its critical radius, and
//!   a weighted radial minimizer;
//! * [`regularity`] — comparison, cut-and-paste, barrier positivity,
//!   equicontinuity, and boundary Hölder checks;
//! * [`sweep`] — parameter sweeps over monotone families and jump detection;
//! * [`acceptance`] — the end-to-end verification suite driven by the CLI and
//!   the integration tests.

pub mod acceptance;
pub mod boundary;
pub mod cli;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod io;
pub mod oracle1d;
pub mod radial;
pub mod regularity;
pub mod solver;
pub mod sweep;

pub use error::{Error, Result};
