//! Soluble quotients of finitely presented groups.
//!
//! The crate computes consistent labelled power-conjugate presentations for
//! finite soluble quotients of a finitely presented group, layer by layer
//! along a prescribed soluble series, together with the epimorphism.

pub mod collector;
pub mod covering;
pub mod driver;
pub mod error;
pub mod group_algebra;
pub mod module_solver;
pub mod presentations;

pub use error::{Ceiling, Error, ParseError, Result};
