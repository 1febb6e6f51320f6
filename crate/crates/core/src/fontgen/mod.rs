//! Font synthesis: coordinates → font vector → per-glyph masks → outlines.

mod coords;
mod font;
pub mod raster;
mod synth;
pub mod trace;

pub use coords::{interpolate, FontCoordinates};
pub use font::{build_font, trace_glyphs, BuildOptions, GlyphOutline, SynthFont, TracedGlyph};
pub use raster::{binarize, iou, rasterize, Bitmask, Raster};
pub use synth::{synthesize_vector, SynthesizedFont};
pub use trace::{trace_glyph, trace_glyph_with, Contour, Point, TraceOptions};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FontGenError {
    #[error("basis has {actual} components, expected {expected}")]
    ComponentMismatch { expected: usize, actual: usize },
    #[error("coordinates must be finite and nonnegative, got {0}")]
    InvalidCoordinates(FontCoordinates),
    #[error("coordinates {0} are outside the feasible region")]
    Infeasible(FontCoordinates),
    #[error("interpolation parameter {0} outside [0, 1]")]
    InterpolationParameter(f64),
}
