//! Preprocessing around the transforms: image loading, normalization, Q7
//! conversion, the `.dext` container and batch conversion.

pub mod dataset;
pub mod format;
pub mod image_io;
pub mod quantize;

pub use dataset::{preprocess, process_dataset, BatchSummary, FileRecord, FileStatus, PipelineConfig};
pub use format::{read_tensor, write_tensor, TensorFileHeader};
pub use image_io::load_image;
pub use quantize::{normalize, quantize_q7, NormalizationSpec};
