//! Ancestral selection graphs, lookdown constructions and dualities for the
//! two-type Moran model with many-way selection and mutation.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod ancestral;
pub mod ctmc;
pub mod diffusion;
pub mod dualities;
pub mod error;
pub mod generators;
pub mod graphical;
pub mod haldane;
pub mod params;
pub mod rng;

pub use error::{Error, Result};
pub use params::{DiffusionParams, ModelParams, Rates, Scheme, SelectionSpec};
