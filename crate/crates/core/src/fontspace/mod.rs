//! Learning a low-dimensional nonnegative font space from glyph atlases.
//!
//! Every font in the corpus is flattened into one [`FontVector`]: the atlas
//! raster scaled to `[0, 1]`, followed by an (advance, left side bearing) pair
//! per glyph. The vectors become the rows of a data matrix `X` that is
//! factorized as `X ≈ coords · basis` with both factors nonnegative.
//!
//! Rows of `basis` are the generative components; a row of `coords` places a
//! corpus font in the learned space.

mod atlas;
mod cv;
mod nmf;
mod nnls;

pub use atlas::{GlyphAtlas, GlyphMetrics};
pub use cv::{cross_validate, CvOptions, CvReport, HoldoutMask};
pub use nmf::{nmf, Factorization, NmfOptions};
pub use nnls::{nnls, NnlsSolution};

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FontSpaceError {
    #[error("span overlap between glyph {first:?} and glyph {second:?}")]
    SpanOverlap { first: char, second: char },
    #[error("glyph {glyph:?} span [{start}, {end}) out of bounds for width {width}")]
    SpanOutOfBounds {
        glyph: char,
        start: usize,
        end: usize,
        width: usize,
    },
    #[error("raster has {actual} pixels, expected {expected}")]
    RasterSize { expected: usize, actual: usize },
    #[error("invalid metric for glyph {glyph:?}: {reason}")]
    InvalidMetric { glyph: char, reason: &'static str },
    #[error("glyph set differs from corpus template: {0}")]
    GlyphSetMismatch(String),
    #[error("inconsistent corpus: {0}")]
    InconsistentCorpus(String),
    #[error("data matrix has a negative or non-finite entry at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize },
    #[error("component count {k} out of range 1..={max}")]
    ComponentCount { k: usize, max: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("matrix {rows}x{cols} is too small for a 4x4 block partition")]
    TooSmallForHoldout { rows: usize, cols: usize },
    #[error("mask shape {mask_rows}x{mask_cols} does not match data {rows}x{cols}")]
    MaskShape {
        mask_rows: usize,
        mask_cols: usize,
        rows: usize,
        cols: usize,
    },
}

/// Which alignment field of a glyph a vector entry holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignmentField {
    Advance,
    LeftSideBearing,
}

/// Where a vector index points back to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayoutEntry {
    Pixel { row: usize, col: usize },
    Alignment { glyph: usize, field: AlignmentField },
}

/// One glyph cell of the shared atlas layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlyphSlot {
    #[serde(rename = "char")]
    pub ch: char,
    /// Half-open column range `[start, end)` inside the atlas raster.
    pub span: [usize; 2],
}

impl GlyphSlot {
    pub fn width(&self) -> usize {
        self.span[1] - self.span[0]
    }
}

/// Layout shared by every vector of a corpus: raster geometry, glyph cells,
/// and how alignment scalars map back to font units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusLayout {
    pub height: usize,
    pub width: usize,
    pub glyphs: Vec<GlyphSlot>,
    /// Units per em of synthesized fonts.
    pub units_per_em: f64,
    /// Multiplier turning alignment entries back into font units.
    pub alignment_scale: f64,
    /// Raster row (from the top) on which glyphs sit.
    pub baseline_row: usize,
    /// Raster pixels per em, used to map traced outlines to font units.
    pub pixels_per_em: f64,
}

impl CorpusLayout {
    pub fn pixel_count(&self) -> usize {
        self.height * self.width
    }

    /// Total vector length `H·W + 2·n_glyphs`.
    pub fn dim(&self) -> usize {
        self.pixel_count() + 2 * self.glyphs.len()
    }

    pub fn pixel_index(&self, row: usize, col: usize) -> usize {
        row * self.width + col
    }

    pub fn alignment_index(&self, glyph: usize, field: AlignmentField) -> usize {
        let base = self.pixel_count() + 2 * glyph;
        match field {
            AlignmentField::Advance => base,
            AlignmentField::LeftSideBearing => base + 1,
        }
    }

    pub fn describe(&self, index: usize) -> Option<LayoutEntry> {
        if index < self.pixel_count() {
            Some(LayoutEntry::Pixel {
                row: index / self.width,
                col: index % self.width,
            })
        } else if index < self.dim() {
            let off = index - self.pixel_count();
            let field = if off.is_multiple_of(2) {
                AlignmentField::Advance
            } else {
                AlignmentField::LeftSideBearing
            };
            Some(LayoutEntry::Alignment { glyph: off / 2, field })
        } else {
            None
        }
    }

    pub fn glyph_index(&self, ch: char) -> Option<usize> {
        self.glyphs.iter().position(|g| g.ch == ch)
    }

    /// Font units per raster pixel.
    pub fn units_per_pixel(&self) -> f64 {
        self.units_per_em / self.pixels_per_em
    }
}

/// A flattened font: normalized pixels followed by scaled alignment scalars.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FontVector {
    pub values: Vec<f64>,
}

impl FontVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// How alignment metrics are brought to the pixel scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AlignmentScale {
    /// Divide each font's metrics by that font's own units per em.
    UnitsPerEm,
    /// Divide every metric by a fixed positive constant.
    Fixed(f64),
}

/// Flattens one atlas with the given metric divisor.
pub fn font_vector(atlas: &GlyphAtlas, alignment_divisor: f64) -> FontVector {
    let mut values = Vec::with_capacity(atlas.pixels().len() + 2 * atlas.glyphs().len());
    values.extend(atlas.pixels().iter().map(|&p| p as f64 / 255.0));
    for g in atlas.glyphs() {
        values.push(g.advance / alignment_divisor);
        values.push(g.lsb / alignment_divisor);
    }
    FontVector { values }
}

/// Stacks the font vectors of a corpus into the data matrix `X`.
///
/// The first atlas acts as the template; every other atlas must match its
/// raster size and glyph cells exactly.
pub fn assemble_matrix(
    atlases: &[GlyphAtlas],
    scale: AlignmentScale,
) -> Result<(Matrix, CorpusLayout), FontSpaceError> {
    if atlases.len() < 2 {
        return Err(FontSpaceError::InconsistentCorpus(alloc::format!(
            "need at least 2 atlases, got {}",
            atlases.len()
        )));
    }
    let template = &atlases[0];
    for a in &atlases[1..] {
        a.check_against(template)?;
    }
    if let AlignmentScale::Fixed(s) = scale {
        if !(s > 0.0 && s.is_finite()) {
            return Err(FontSpaceError::InconsistentCorpus(alloc::format!(
                "alignment scale must be positive, got {s}"
            )));
        }
    }
    let layout = CorpusLayout {
        height: template.height(),
        width: template.width(),
        glyphs: template
            .glyphs()
            .iter()
            .map(|g| GlyphSlot { ch: g.ch, span: g.span })
            .collect(),
        units_per_em: template.units_per_em(),
        alignment_scale: match scale {
            AlignmentScale::UnitsPerEm => template.units_per_em(),
            AlignmentScale::Fixed(s) => s,
        },
        baseline_row: template.baseline_row(),
        pixels_per_em: template.point_size() as f64,
    };
    let d = layout.dim();
    let mut data = Vec::with_capacity(atlases.len() * d);
    for a in atlases {
        let divisor = match scale {
            AlignmentScale::UnitsPerEm => a.units_per_em(),
            AlignmentScale::Fixed(s) => s,
        };
        data.extend(font_vector(a, divisor).values);
    }
    Ok((Matrix::from_vec(atlases.len(), d, data), layout))
}

/// A learned font space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FontBasis {
    /// `k × D`; row `j` is generative component `j`.
    pub basis: Matrix,
    /// `n_fonts × k`; row `i` places corpus font `i` in the space.
    pub coords: Matrix,
    pub layout: CorpusLayout,
    pub font_names: Vec<String>,
}

impl FontBasis {
    pub fn new(
        factorization: Factorization,
        layout: CorpusLayout,
        font_names: Vec<String>,
    ) -> Result<Self, FontSpaceError> {
        let Factorization { coords, basis, .. } = factorization;
        if basis.cols() != layout.dim() {
            return Err(FontSpaceError::DimensionMismatch {
                expected: layout.dim(),
                actual: basis.cols(),
            });
        }
        if coords.cols() != basis.rows() {
            return Err(FontSpaceError::DimensionMismatch {
                expected: basis.rows(),
                actual: coords.cols(),
            });
        }
        if font_names.len() != coords.rows() {
            return Err(FontSpaceError::DimensionMismatch {
                expected: coords.rows(),
                actual: font_names.len(),
            });
        }
        Ok(Self {
            basis,
            coords,
            layout,
            font_names,
        })
    }

    pub fn k(&self) -> usize {
        self.basis.rows()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    /// `coords · basis`.
    pub fn reconstruction(&self) -> Matrix {
        self.coords.matmul(&self.basis)
    }

    /// Resolves the `W·s, H/s` scale ambiguity of the factorization so the
    /// corpus fonts' coordinate sums average to `target_mean_sum`.
    pub fn normalize_coordinate_scale(&mut self, target_mean_sum: f64) {
        let n = self.coords.rows();
        if n == 0 {
            return;
        }
        let mean_sum = self.coords.as_slice().iter().sum::<f64>() / n as f64;
        if mean_sum.is_nan() || mean_sum <= 0.0 {
            return;
        }
        let s = target_mean_sum / mean_sum;
        self.coords.as_mut_slice().iter_mut().for_each(|v| *v *= s);
        self.basis.as_mut_slice().iter_mut().for_each(|v| *v /= s);
    }

    /// Places a font vector in the space by nonnegative least squares.
    pub fn encode(&self, v: &FontVector) -> Result<NnlsSolution, FontSpaceError> {
        encode_font(v, self)
    }
}

/// Coordinates `c ≥ 0` minimizing `‖v − c·basis‖₂`.
pub fn encode_font(v: &FontVector, basis: &FontBasis) -> Result<NnlsSolution, FontSpaceError> {
    if v.len() != basis.dim() {
        return Err(FontSpaceError::DimensionMismatch {
            expected: basis.dim(),
            actual: v.len(),
        });
    }
    Ok(nnls(&basis.basis, &v.values))
}

pub(crate) fn check_nonnegative(x: &Matrix) -> Result<(), FontSpaceError> {
    for i in 0..x.rows() {
        for (j, &v) in x.row(i).iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(FontSpaceError::NegativeEntry { row: i, col: j });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn atlas(name: &str, pixels: Vec<u8>, advance: f64) -> GlyphAtlas {
        GlyphAtlas::new(
            name.to_string(),
            40,
            1000.0,
            4,
            6,
            4,
            pixels,
            vec![
                GlyphMetrics {
                    ch: 'a',
                    span: [0, 3],
                    advance,
                    lsb: 20.0,
                },
                GlyphMetrics {
                    ch: 'b',
                    span: [3, 6],
                    advance: 600.0,
                    lsb: 0.0,
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn assemble_normalizes_pixels_and_metrics() {
        let mut px = vec![0u8; 24];
        px[0] = 255;
        let a = atlas("A", px, 500.0);
        let b = atlas("B", vec![0u8; 24], 250.0);
        let (x, layout) = assemble_matrix(&[a, b], AlignmentScale::Fixed(1000.0)).unwrap();
        assert_eq!(x.rows(), 2);
        assert_eq!(x.cols(), 4 * 6 + 2 * 2);
        assert_eq!(layout.dim(), x.cols());
        assert_eq!(x[(0, 0)], 1.0);
        let adv = layout.alignment_index(0, AlignmentField::Advance);
        assert_eq!(x[(0, adv)], 0.5);
        assert_eq!(x[(1, adv)], 0.25);
        assert_eq!(x[(0, adv + 1)], 0.02);
        // all-zero raster stays all-zero in the pixel block
        assert!(x.row(1)[..24].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn layout_describe_roundtrips() {
        let a = atlas("A", vec![0u8; 24], 500.0);
        let b = atlas("B", vec![0u8; 24], 500.0);
        let (_, layout) = assemble_matrix(&[a, b], AlignmentScale::UnitsPerEm).unwrap();
        assert_eq!(
            layout.describe(layout.pixel_index(2, 5)),
            Some(LayoutEntry::Pixel { row: 2, col: 5 })
        );
        assert_eq!(
            layout.describe(layout.alignment_index(1, AlignmentField::LeftSideBearing)),
            Some(LayoutEntry::Alignment {
                glyph: 1,
                field: AlignmentField::LeftSideBearing
            })
        );
        assert_eq!(layout.describe(layout.dim()), None);
    }

    #[test]
    fn assemble_rejects_single_atlas_and_mismatch() {
        let a = atlas("A", vec![0u8; 24], 500.0);
        assert!(assemble_matrix(std::slice::from_ref(&a), AlignmentScale::UnitsPerEm).is_err());
        let other = GlyphAtlas::new(
            "C".to_string(),
            40,
            1000.0,
            4,
            6,
            4,
            vec![0u8; 24],
            vec![GlyphMetrics {
                ch: 'a',
                span: [0, 3],
                advance: 1.0,
                lsb: 0.0,
            }],
        )
        .unwrap();
        assert!(matches!(
            assemble_matrix(&[a, other], AlignmentScale::UnitsPerEm),
            Err(FontSpaceError::GlyphSetMismatch(_))
        ));
    }
}
