//! Numerical laboratory for Besov-Morrey quasi-norms on sampled functions.

// `!(x > 0.0)` is how parameter checks reject NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bands;
pub mod diffnorm;
pub mod error;
pub mod grid;
pub mod lab;
pub mod morrey;
pub mod zoo;
