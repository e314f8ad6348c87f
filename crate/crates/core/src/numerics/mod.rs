//! Dense linear algebra and special functions.

mod matrix;
mod special;
mod svd;

pub use matrix::{DataMatrix, FrameShape};
pub(crate) use special::{ln_beta, ln_gamma_pos};
pub use special::{log_gamma, reg_inc_beta};
pub(crate) use svd::svt_with_rank;
pub use svd::{
    nuclear_norm, reduced_svd, singular_value_threshold, soft_threshold, soft_threshold_matrix, ReducedSvd,
    DEFAULT_RANK_TOL,
};
