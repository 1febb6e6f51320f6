use alloc::vec::Vec;

use super::raster::Raster;
use super::{FontCoordinates, FontGenError};
use crate::fontspace::{AlignmentField, CorpusLayout, FontBasis, FontVector};

/// `c · basis`, with accessors that split it back along the corpus layout.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthesizedFont<'a> {
    /// The raw linear combination, before clamping.
    pub vector: FontVector,
    pub layout: &'a CorpusLayout,
}

impl SynthesizedFont<'_> {
    /// The whole atlas raster, clamped to `[0, 1]`.
    pub fn raster(&self) -> Raster {
        let n = self.layout.pixel_count();
        Raster::new(
            self.layout.width,
            self.layout.height,
            self.vector.values[..n].iter().map(|v| v.clamp(0.0, 1.0)).collect(),
        )
    }

    /// The clamped raster cell of glyph `g`.
    pub fn glyph_raster(&self, g: usize) -> Raster {
        let slot = &self.layout.glyphs[g];
        let [start, end] = slot.span;
        let mut data = Vec::with_capacity((end - start) * self.layout.height);
        for row in 0..self.layout.height {
            let base = self.layout.pixel_index(row, 0);
            data.extend(
                self.vector.values[base + start..base + end]
                    .iter()
                    .map(|v| v.clamp(0.0, 1.0)),
            );
        }
        Raster::new(end - start, self.layout.height, data)
    }

    /// `(advance, left side bearing)` of glyph `g` in font units.
    pub fn metrics(&self, g: usize) -> (f64, f64) {
        let s = self.layout.alignment_scale;
        let adv = self.vector.values[self.layout.alignment_index(g, AlignmentField::Advance)];
        let lsb = self.vector.values[self.layout.alignment_index(g, AlignmentField::LeftSideBearing)];
        (adv.max(0.0) * s, lsb.max(0.0) * s)
    }
}

/// Linear combination of the basis rows with weights `c`.
pub fn synthesize_vector<'a>(c: &FontCoordinates, basis: &'a FontBasis) -> Result<SynthesizedFont<'a>, FontGenError> {
    if basis.k() != 3 {
        return Err(FontGenError::ComponentMismatch {
            expected: 3,
            actual: basis.k(),
        });
    }
    if !c.is_finite() || c.0.iter().any(|&v| v < 0.0) {
        return Err(FontGenError::InvalidCoordinates(*c));
    }
    let mut values = alloc::vec![0.0; basis.dim()];
    for (p, &w) in c.0.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for (o, &b) in values.iter_mut().zip(basis.basis.row(p)) {
            *o += w * b;
        }
    }
    Ok(SynthesizedFont {
        vector: FontVector { values },
        layout: &basis.layout,
    })
}
