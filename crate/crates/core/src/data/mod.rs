//! Dataset parsing and run artifacts.

pub mod libsvm;
pub mod manifest;
pub mod trace;

pub use libsvm::{parse_libsvm, read_libsvm_file, write_libsvm, SparseDataset};
pub use manifest::{read_manifest, write_manifest};
pub use trace::{read_trace_csv, write_trace_csv, TraceGroup, TRACE_HEADER};
