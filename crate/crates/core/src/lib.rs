//! Analysis and synthesis toolkit for broadband cyclic-symmetric circulators
//! built from a spatiotemporally modulated junction and three identical
//! bandpass matching filters.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bound;
pub mod compose;
pub mod error;
pub mod filters;
pub mod hboracle;
pub mod junction;
pub mod netcore;
pub mod numeric;
pub mod sweep;

pub use error::{Error, Result};
