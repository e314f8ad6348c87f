//! End-to-end model selection over a regularization path.

mod pipeline;
mod quantize;
mod refine;

pub use pipeline::{
    default_coder_mode, default_delta_e, select_model, CandidateKind, CandidateOutcome, ModelCandidate,
    SelectionOptions, SelectionReport,
};
pub use quantize::{quantize_decomposition, quantize_factors, QuantizedDecomposition};
pub use refine::{refine_quantization, Refinement, MAX_HALVINGS};
