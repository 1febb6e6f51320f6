use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::raster::{binarize, Bitmask};
use super::synth::{synthesize_vector, SynthesizedFont};
use super::trace::{trace_glyph_with, Contour, Point, TraceOptions};
use super::{FontCoordinates, FontGenError};
use crate::fontspace::FontBasis;

/// Outline of one synthesized glyph in font units (y up, baseline at 0).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlyphOutline {
    #[serde(rename = "char")]
    pub ch: char,
    pub contours: Vec<Contour>,
    pub advance_width: f64,
    pub left_side_bearing: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthFont {
    pub name: String,
    pub units_per_em: f64,
    pub outlines: Vec<GlyphOutline>,
    pub source_coords: FontCoordinates,
    /// Built from coordinates outside the feasible region.
    pub forced: bool,
}

impl SynthFont {
    pub fn glyph(&self, ch: char) -> Option<&GlyphOutline> {
        self.outlines.iter().find(|g| g.ch == ch)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildOptions {
    /// Binarization threshold on the clamped raster.
    pub threshold: f64,
    pub trace: TraceOptions,
    /// Build even when the coordinates are infeasible.
    pub force: bool,
    pub name: Option<String>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            threshold: 0.5,
            trace: TraceOptions::default(),
            force: false,
            name: None,
        }
    }
}

/// Binary mask and pixel-space contours of one glyph.
#[derive(Clone, Debug, PartialEq)]
pub struct TracedGlyph {
    pub mask: Bitmask,
    pub contours: Vec<Contour>,
}

/// Binarizes and traces every glyph cell of a synthesized font.
pub fn trace_glyphs(synth: &SynthesizedFont<'_>, threshold: f64, opts: &TraceOptions) -> Vec<TracedGlyph> {
    (0..synth.layout.glyphs.len())
        .map(|g| {
            let mask = binarize(&synth.glyph_raster(g), threshold);
            let contours = trace_glyph_with(&mask, opts);
            TracedGlyph { mask, contours }
        })
        .collect()
}

/// Synthesizes, traces and assembles a complete font at `c`.
pub fn build_font(c: &FontCoordinates, basis: &FontBasis, opts: &BuildOptions) -> Result<SynthFont, FontGenError> {
    let feasible = c.is_feasible();
    if !feasible && !opts.force {
        return Err(FontGenError::Infeasible(*c));
    }
    let synth = synthesize_vector(c, basis)?;
    let layout = &basis.layout;
    let upp = layout.units_per_pixel();
    let baseline_y = (layout.height - layout.baseline_row) as f64;

    let outlines = trace_glyphs(&synth, opts.threshold, &opts.trace)
        .into_iter()
        .enumerate()
        .map(|(g, traced)| {
            let (advance, lsb) = synth.metrics(g);
            let ink_left = traced
                .contours
                .iter()
                .flat_map(|c| c.points.iter().map(|p| p.x))
                .fold(f64::INFINITY, f64::min);
            let contours = traced
                .contours
                .into_iter()
                .map(|c| Contour {
                    points: c
                        .points
                        .into_iter()
                        .map(|p| Point::new(lsb + (p.x - ink_left) * upp, (p.y - baseline_y) * upp))
                        .collect(),
                })
                .collect();
            GlyphOutline {
                ch: layout.glyphs[g].ch,
                contours,
                advance_width: advance,
                left_side_bearing: lsb,
            }
        })
        .collect();

    Ok(SynthFont {
        name: opts
            .name
            .clone()
            .unwrap_or_else(|| format!("AdaptiFont {:.3} {:.3} {:.3}", c.0[0], c.0[1], c.0[2])),
        units_per_em: layout.units_per_em,
        outlines,
        source_coords: *c,
        forced: !feasible,
    })
}
