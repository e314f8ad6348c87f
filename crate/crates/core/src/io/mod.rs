//! Frame stacks, matrices and selection reports on disk.

mod export;
mod matrix_csv;
mod pgm;
mod report;

pub use export::{export_artifacts, ExportedFiles, FOREGROUND_OFFSET};
pub use matrix_csv::{format_exact, load_matrix_csv, save_matrix_csv};
pub use pgm::{
    column_to_image, encode_pgm, export_frames, load_frame_stack, read_pgm, write_pgm, FrameStackManifest,
    GrayImage,
};
pub use report::{CandidateRecord, ReportFile};
