//! Stochastic homogenization of Helmholtz scattering by random composites.
//!
//! The guide in `book/` walks through the modules in pipeline order; its
//! code blocks run as doc-tests.

pub mod correctors;
pub mod error;
pub mod expansion;
pub mod fem;
pub mod harness;
pub mod microstructure;
pub mod scattering;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/microstructure.md")]
    mod microstructure {}
    #[doc = include_str!("../../../book/src/correctors.md")]
    mod correctors {}
    #[doc = include_str!("../../../book/src/scattering.md")]
    mod scattering {}
    #[doc = include_str!("../../../book/src/expansion.md")]
    mod expansion {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
}
