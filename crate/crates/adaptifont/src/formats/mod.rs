//! On-disk formats.

pub mod atlas;
pub mod basis;
pub mod jsonl;
pub mod pgm;
pub mod svg;

pub use atlas::{ingest_atlas, ingest_corpus, write_atlas, AtlasMetadata};
pub use basis::{read_basis, write_basis, BasisDocument};
pub use jsonl::{read_corpus, read_trial_log, write_corpus, write_trace, write_trial_log};
pub use pgm::{read_pgm, write_pgm, GrayImage};
pub use svg::{glyph_path_data, svg_font};
