//! Exceptional points of a three-mode optomechanical system driven on the
//! blue sideband: two cavities coupled through one mechanical resonator.
//!
//! The crate goes from physical parameters to the linearized steady state
//! ([`com_model`]), imposes the pseudo-Hermiticity conditions
//! ([`pseudo_hermitian`]), locates second- and third-order exceptional
//! points through the discriminant of the characteristic cubic
//! ([`ep_locator`]), sweeps spectra and phase diagrams ([`sweep`]) and checks
//! classical stability of the quadrature dynamics ([`stability`]).
//!
//! Rates and frequencies are plain `f64`s in whatever unit the caller picks;
//! most routines take `kappa_c` explicitly and report dimensionless
//! quantities in units of it.

pub mod com_model;
pub mod complex_poly;
pub mod ep_locator;
mod error;
pub mod pseudo_hermitian;
pub mod stability;
pub mod sweep;

pub use complex_poly::ComplexValue;
pub use error::{Error, Result};

// The guide's snippets run as doctests of this crate.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/cubic.md")]
    mod cubic {}
    #[doc = include_str!("../../../book/src/pseudo_hermitian.md")]
    mod pseudo_hermitian {}
    #[doc = include_str!("../../../book/src/exceptional_points.md")]
    mod exceptional_points {}
    #[doc = include_str!("../../../book/src/sweeps.md")]
    mod sweeps {}
    #[doc = include_str!("../../../book/src/phase_diagrams.md")]
    mod phase_diagrams {}
    #[doc = include_str!("../../../book/src/stability.md")]
    mod stability {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
