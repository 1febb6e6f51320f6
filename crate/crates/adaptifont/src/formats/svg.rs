//! SVG 1.1 font documents.
//!
//! Glyph outlines are already in font units with y pointing up and the
//! baseline at 0, which is the SVG font coordinate system, so path data is
//! emitted without any transform.

use std::fmt::Write as _;

use adaptifont_core::fontgen::{GlyphOutline, SynthFont};

/// Decimal with at most three fractional digits and no trailing zeros.
pub fn format_number(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Path data for one glyph: one closed `M … L … Z` subpath per contour.
pub fn glyph_path_data(glyph: &GlyphOutline) -> String {
    let mut d = String::new();
    for contour in &glyph.contours {
        for (i, p) in contour.ring().iter().enumerate() {
            if !d.is_empty() {
                d.push(' ');
            }
            d.push(if i == 0 { 'M' } else { 'L' });
            let _ = write!(d, "{} {}", format_number(p.x), format_number(p.y));
        }
        if !contour.ring().is_empty() {
            d.push_str(" Z");
        }
    }
    d
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// A complete SVG font document. Identical fonts give identical bytes.
pub fn svg_font(font: &SynthFont) -> String {
    let upm = font.units_per_em;
    let default_adv = if font.outlines.is_empty() {
        upm / 2.0
    } else {
        font.outlines.iter().map(|g| g.advance_width).sum::<f64>() / font.outlines.len() as f64
    };
    let c = font.source_coords.0;
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str("<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\">\n");
    let _ = writeln!(
        s,
        "<metadata>coords {} {} {}{}</metadata>",
        c[0],
        c[1],
        c[2],
        if font.forced { " forced" } else { "" }
    );
    s.push_str("<defs>\n");
    let _ = writeln!(
        s,
        "<font id=\"adaptifont\" horiz-adv-x=\"{}\">",
        format_number(default_adv)
    );
    let _ = writeln!(
        s,
        "<font-face font-family=\"{}\" units-per-em=\"{}\" ascent=\"{}\" descent=\"{}\"/>",
        escape(&font.name),
        format_number(upm),
        format_number(0.8 * upm),
        format_number(-0.2 * upm)
    );
    let _ = writeln!(s, "<missing-glyph horiz-adv-x=\"{}\"/>", format_number(default_adv));
    for g in &font.outlines {
        let ch = escape(&g.ch.to_string());
        let _ = writeln!(
            s,
            "<glyph unicode=\"{ch}\" glyph-name=\"u{:04X}\" horiz-adv-x=\"{}\" d=\"{}\"/>",
            g.ch as u32,
            format_number(g.advance_width),
            glyph_path_data(g)
        );
    }
    s.push_str("</font>\n</defs>\n</svg>\n");
    s
}
