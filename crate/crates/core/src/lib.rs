//! Numerical verification of covering bounds for univalent functions on
//! the unit disk, Roper-Suffridge and Muir extension operators on the ball
//! `{|x|^2 + ||y||^r < 1}` and extensions of semigroup generators.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod poly;
pub mod quadrature;
pub mod ode;
pub mod sampling;
pub mod univalent;
pub mod semigroups;
pub mod covering;
pub mod extensions;
pub mod report;
pub mod sharp;
pub mod genext;
pub mod spec;

pub use error::{Error, Result};
pub use num_complex::Complex64;
