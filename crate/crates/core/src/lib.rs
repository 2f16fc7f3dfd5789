//! Numerical laboratory for p-Laplacian functionals with a potential term.
//!
//! The crate evaluates the energy `Q(u) = ∫ (|∇u|^p + V|u|^p)` on radial
//! functions, the Picone Lagrangians and their simplified equivalents, and
//! the integral criteria that separate ground states from weighted spectral
//! gaps. On top of these it runs the comparison machinery that transfers a
//! null sequence from one functional to another.
//!
//! All fields are radial: `u(x) = u(|x|)`, so every integral over `ℝ^d`
//! reduces to `C_d ∫ f(r) r^{d-1} dr` with `C_d` the area of the unit sphere.
//!
//! Module map:
//!
//! - [`domain`]: exponents, dimensions, radial domains, grids, potentials, problems
//! - [`field`]: radial scalar fields (closed-form profiles, sampled data, combinators)
//! - [`quad`]: adaptive quadrature and tail classification of improper integrals
//! - [`picone`]: pointwise Lagrangians and the scalar inequality kernel
//! - [`energy`]: `Q`, `Q(vw)`, simplified energies and equivalence reports
//! - [`solutions`]: closed-form solution families and residual certification
//! - [`nullseq`]: cutoff families, ground-state classification, transfer engine
//! - [`linearized`]: the linearized quadratic form and its ground-state transfer
//! - [`io`]: JSON descriptions of fields, potentials, problems and families

// Negated comparisons are used on purpose so that NaN lands in the reject branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod domain;
pub mod energy;
mod error;
pub mod field;
pub mod io;
pub mod linearized;
pub mod nullseq;
pub mod par;
pub mod picone;
pub mod quad;
pub mod solutions;
pub mod stats;

pub use error::{Error, Result};
