//! On-disk formats: radar frame files, PGM images, and TSV manifests.

mod frame;
mod manifest;
mod pgm;

pub use frame::{read_frame_file, read_frames, write_frame_file, write_frames, FRAME_HEADER_LEN, FRAME_MAGIC, FRAME_VERSION};
pub use manifest::{Manifest, ManifestEntry};
pub use pgm::{read_pgm, read_pgm_file, write_pgm, write_pgm_file, PGM_HEADER};
