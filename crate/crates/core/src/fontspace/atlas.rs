use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::FontSpaceError;

/// Per-glyph cell and horizontal metrics, in font units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlyphMetrics {
    #[serde(rename = "char")]
    pub ch: char,
    pub span: [usize; 2],
    pub advance: f64,
    pub lsb: f64,
}

/// All glyphs of one font rendered side by side into a grayscale raster.
///
/// Ink is high (255 = full ink). Glyph cells are disjoint, ordered column
/// spans of the raster.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlyphAtlas {
    font_name: String,
    point_size: u32,
    units_per_em: f64,
    height: usize,
    width: usize,
    baseline_row: usize,
    pixels: Vec<u8>,
    glyphs: Vec<GlyphMetrics>,
}

impl GlyphAtlas {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        font_name: String,
        point_size: u32,
        units_per_em: f64,
        height: usize,
        width: usize,
        baseline_row: usize,
        pixels: Vec<u8>,
        glyphs: Vec<GlyphMetrics>,
    ) -> Result<Self, FontSpaceError> {
        if pixels.len() != height * width {
            return Err(FontSpaceError::RasterSize {
                expected: height * width,
                actual: pixels.len(),
            });
        }
        if point_size == 0 {
            return Err(FontSpaceError::InconsistentCorpus(format!(
                "{font_name}: point size must be positive"
            )));
        }
        if !(units_per_em > 0.0 && units_per_em.is_finite()) {
            return Err(FontSpaceError::InconsistentCorpus(format!(
                "{font_name}: units_per_em must be positive"
            )));
        }
        if baseline_row > height {
            return Err(FontSpaceError::InconsistentCorpus(format!(
                "{font_name}: baseline row {baseline_row} below raster height {height}"
            )));
        }
        let mut prev: Option<&GlyphMetrics> = None;
        for g in &glyphs {
            let [start, end] = g.span;
            if start >= end || end > width {
                return Err(FontSpaceError::SpanOutOfBounds {
                    glyph: g.ch,
                    start,
                    end,
                    width,
                });
            }
            if let Some(p) = prev {
                if start < p.span[1] {
                    return Err(FontSpaceError::SpanOverlap {
                        first: p.ch,
                        second: g.ch,
                    });
                }
            }
            for (v, reason) in [
                (g.advance, "advance must be finite and nonnegative"),
                (g.lsb, "left side bearing must be finite and nonnegative"),
            ] {
                if !v.is_finite() || v < 0.0 {
                    return Err(FontSpaceError::InvalidMetric { glyph: g.ch, reason });
                }
            }
            prev = Some(g);
        }
        for (i, g) in glyphs.iter().enumerate() {
            if glyphs[..i].iter().any(|o| o.ch == g.ch) {
                return Err(FontSpaceError::GlyphSetMismatch(format!("duplicate glyph {:?}", g.ch)));
            }
        }
        Ok(Self {
            font_name,
            point_size,
            units_per_em,
            height,
            width,
            baseline_row,
            pixels,
            glyphs,
        })
    }

    /// Checks raster geometry and glyph cells against the corpus template.
    pub fn check_against(&self, template: &GlyphAtlas) -> Result<(), FontSpaceError> {
        if self.height != template.height || self.width != template.width {
            return Err(FontSpaceError::InconsistentCorpus(format!(
                "{}: raster {}x{} differs from template {}x{}",
                self.font_name, self.height, self.width, template.height, template.width
            )));
        }
        if self.glyphs.len() != template.glyphs.len() {
            return Err(FontSpaceError::GlyphSetMismatch(format!(
                "{}: {} glyphs, template has {}",
                self.font_name,
                self.glyphs.len(),
                template.glyphs.len()
            )));
        }
        for (i, (a, b)) in self.glyphs.iter().zip(&template.glyphs).enumerate() {
            if a.ch != b.ch {
                return Err(FontSpaceError::GlyphSetMismatch(format!(
                    "{}: glyph #{i} is {:?}, template has {:?}",
                    self.font_name, a.ch, b.ch
                )));
            }
            if a.span != b.span {
                return Err(FontSpaceError::GlyphSetMismatch(format!(
                    "{}: glyph {:?} span {:?} differs from template {:?}",
                    self.font_name, a.ch, a.span, b.span
                )));
            }
        }
        Ok(())
    }

    pub fn font_name(&self) -> &str {
        &self.font_name
    }

    pub fn point_size(&self) -> u32 {
        self.point_size
    }

    pub fn units_per_em(&self) -> f64 {
        self.units_per_em
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn baseline_row(&self) -> usize {
        self.baseline_row
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn glyphs(&self) -> &[GlyphMetrics] {
        &self.glyphs
    }
}
