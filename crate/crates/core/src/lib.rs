//! Rank selection for robust PCA by minimum description length.
//!
//! A data matrix is split as `X = A + E` along a path of regularization
//! weights; each candidate is quantized, coded losslessly and scored by its
//! total codelength, and the shortest description wins.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coding;
pub mod error;
pub mod io;
pub mod numerics;
pub mod select;
pub mod solver;
pub mod synth;

pub use coding::{BitAllocation, CodeLength, CoderMode, QuantizationGrid};
pub use error::{Error, Result};
pub use numerics::{DataMatrix, FrameShape};
pub use select::{select_model, SelectionOptions, SelectionReport};
pub use solver::{Lambda, LambdaSchedule, SolverConfig};
