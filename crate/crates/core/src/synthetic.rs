//! Procedural stroke fonts rendered into glyph atlases.
//!
//! Each glyph is a handful of polylines on a simple skeleton. A font is
//! drawn from three style parameters (stroke weight, horizontal width and
//! serif length), so a corpus of such fonts spans a small, smooth family
//! that a three-component factorization captures well.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::fontspace::{FontSpaceError, GlyphAtlas, GlyphMetrics};

/// Characters of the atlas inventory, in layout order.
pub const GLYPH_INVENTORY: &str = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ.,;:!?-";

/// Units per em of every synthetic font.
pub const UNITS_PER_EM: f64 = 1000.0;

// Vertical levels in em.
const B: f64 = 0.0;
const D: f64 = -0.2;
const M: f64 = 0.24;
const X: f64 = 0.48;
const C: f64 = 0.35;
const H: f64 = 0.70;
const A: f64 = 0.74;
const LEVELS: [f64; 5] = [B, D, X, H, A];

const BASE_GLYPH_WIDTH: f64 = 0.4;
const SIDE_BEARING: f64 = 0.04;

type Stroke = &'static [(f64, f64)];

struct Skeleton {
    ch: char,
    /// Relative to the nominal glyph width.
    width: f64,
    strokes: &'static [Stroke],
}

const fn sk(ch: char, width: f64, strokes: &'static [Stroke]) -> Skeleton {
    Skeleton { ch, width, strokes }
}

const BOWL_RIGHT: Stroke = &[
    (0.0, 0.38),
    (0.2, X),
    (0.8, X),
    (1.0, 0.38),
    (1.0, 0.1),
    (0.8, B),
    (0.2, B),
    (0.0, 0.1),
];
const BOWL_LEFT: Stroke = &[
    (1.0, 0.38),
    (0.8, X),
    (0.2, X),
    (0.0, 0.38),
    (0.0, 0.1),
    (0.2, B),
    (0.8, B),
    (1.0, 0.1),
];
const ARCH: Stroke = &[(0.0, 0.38), (0.2, X), (0.8, X), (1.0, 0.38), (1.0, B)];
const CAP_O: Stroke = &[
    (0.2, B),
    (0.0, 0.15),
    (0.0, 0.55),
    (0.2, H),
    (0.8, H),
    (1.0, 0.55),
    (1.0, 0.15),
    (0.8, B),
    (0.2, B),
];
const CAP_P: Stroke = &[
    (0.0, B),
    (0.0, H),
    (0.8, H),
    (1.0, 0.6),
    (1.0, 0.45),
    (0.8, C),
    (0.0, C),
];
const COMMA: Stroke = &[(0.55, 0.04), (0.35, -0.12)];
const BASE_DOT: Stroke = &[(0.5, 0.02)];

static SKELETONS: [Skeleton; 59] = [
    sk(
        'a',
        1.0,
        &[
            &[(0.1, X), (0.8, X), (1.0, 0.38), (1.0, B)],
            &[
                (1.0, 0.28),
                (0.2, 0.28),
                (0.0, 0.18),
                (0.0, 0.08),
                (0.2, B),
                (1.0, 0.05),
            ],
        ],
    ),
    sk('b', 1.0, &[&[(0.0, A), (0.0, B)], BOWL_RIGHT]),
    sk(
        'c',
        1.0,
        &[&[
            (1.0, 0.4),
            (0.8, X),
            (0.2, X),
            (0.0, 0.38),
            (0.0, 0.1),
            (0.2, B),
            (0.8, B),
            (1.0, 0.08),
        ]],
    ),
    sk('d', 1.0, &[&[(1.0, A), (1.0, B)], BOWL_LEFT]),
    sk(
        'e',
        1.0,
        &[&[
            (0.0, M),
            (1.0, M),
            (1.0, 0.38),
            (0.8, X),
            (0.2, X),
            (0.0, 0.38),
            (0.0, 0.1),
            (0.2, B),
            (0.8, B),
            (1.0, 0.08),
        ]],
    ),
    sk(
        'f',
        0.7,
        &[&[(0.9, A), (0.5, A), (0.3, 0.64), (0.3, B)], &[(0.0, X), (0.8, X)]],
    ),
    sk('g', 1.0, &[&[(1.0, X), (1.0, -0.1), (0.8, D), (0.1, D)], BOWL_LEFT]),
    sk('h', 1.0, &[&[(0.0, A), (0.0, B)], ARCH]),
    sk('i', 0.5, &[&[(0.5, X), (0.5, B)], &[(0.5, 0.64)]]),
    sk(
        'j',
        0.6,
        &[&[(0.6, X), (0.6, -0.1), (0.4, D), (0.1, D)], &[(0.6, 0.64)]],
    ),
    sk(
        'k',
        1.0,
        &[
            &[(0.0, A), (0.0, B)],
            &[(0.9, X), (0.0, 0.18)],
            &[(0.3, 0.28), (1.0, B)],
        ],
    ),
    sk('l', 0.5, &[&[(0.5, A), (0.5, B)]]),
    sk(
        'm',
        1.3,
        &[
            &[(0.0, X), (0.0, B)],
            &[(0.0, 0.38), (0.15, X), (0.35, X), (0.5, 0.38), (0.5, B)],
            &[(0.5, 0.38), (0.65, X), (0.85, X), (1.0, 0.38), (1.0, B)],
        ],
    ),
    sk('n', 1.0, &[&[(0.0, X), (0.0, B)], ARCH]),
    sk(
        'o',
        1.0,
        &[&[
            (0.2, B),
            (0.0, 0.1),
            (0.0, 0.38),
            (0.2, X),
            (0.8, X),
            (1.0, 0.38),
            (1.0, 0.1),
            (0.8, B),
            (0.2, B),
        ]],
    ),
    sk('p', 1.0, &[&[(0.0, X), (0.0, D)], BOWL_RIGHT]),
    sk('q', 1.0, &[&[(1.0, X), (1.0, D)], BOWL_LEFT]),
    sk('r', 0.7, &[&[(0.0, X), (0.0, B)], &[(0.0, 0.3), (0.3, X), (1.0, X)]]),
    sk(
        's',
        0.9,
        &[&[
            (1.0, 0.42),
            (0.8, X),
            (0.2, X),
            (0.0, 0.4),
            (0.2, M),
            (0.8, M),
            (1.0, 0.08),
            (0.8, B),
            (0.2, B),
            (0.0, 0.06),
        ]],
    ),
    sk(
        't',
        0.7,
        &[&[(0.4, 0.66), (0.4, 0.1), (0.6, B), (0.9, B)], &[(0.0, X), (0.9, X)]],
    ),
    sk(
        'u',
        1.0,
        &[
            &[(0.0, X), (0.0, 0.1), (0.2, B), (0.8, B), (1.0, 0.1)],
            &[(1.0, X), (1.0, B)],
        ],
    ),
    sk('v', 1.0, &[&[(0.0, X), (0.5, B), (1.0, X)]]),
    sk('w', 1.3, &[&[(0.0, X), (0.25, B), (0.5, 0.32), (0.75, B), (1.0, X)]]),
    sk('x', 1.0, &[&[(0.0, X), (1.0, B)], &[(1.0, X), (0.0, B)]]),
    sk('y', 1.0, &[&[(0.0, X), (0.5, B)], &[(1.0, X), (0.3, D), (0.1, D)]]),
    sk('z', 1.0, &[&[(0.0, X), (1.0, X), (0.0, B), (1.0, B)]]),
    sk(
        'A',
        1.1,
        &[&[(0.0, B), (0.5, H), (1.0, B)], &[(0.22, 0.28), (0.78, 0.28)]],
    ),
    sk(
        'B',
        1.0,
        &[
            &[
                (0.0, B),
                (0.0, H),
                (0.75, H),
                (0.92, 0.6),
                (0.92, 0.45),
                (0.75, C),
                (0.0, C),
            ],
            &[(0.75, C), (1.0, 0.25), (1.0, 0.1), (0.8, B), (0.0, B)],
        ],
    ),
    sk(
        'C',
        1.05,
        &[&[
            (1.0, 0.6),
            (0.8, H),
            (0.2, H),
            (0.0, 0.55),
            (0.0, 0.15),
            (0.2, B),
            (0.8, B),
            (1.0, 0.1),
        ]],
    ),
    sk(
        'D',
        1.05,
        &[&[(0.0, B), (0.0, H), (0.6, H), (1.0, 0.5), (1.0, 0.2), (0.6, B), (0.0, B)]],
    ),
    sk(
        'E',
        0.9,
        &[&[(1.0, H), (0.0, H), (0.0, B), (1.0, B)], &[(0.0, C), (0.75, C)]],
    ),
    sk('F', 0.9, &[&[(1.0, H), (0.0, H), (0.0, B)], &[(0.0, C), (0.75, C)]]),
    sk(
        'G',
        1.05,
        &[&[
            (1.0, 0.6),
            (0.8, H),
            (0.2, H),
            (0.0, 0.55),
            (0.0, 0.15),
            (0.2, B),
            (0.8, B),
            (1.0, 0.15),
            (1.0, C),
            (0.55, C),
        ]],
    ),
    sk(
        'H',
        1.05,
        &[&[(0.0, B), (0.0, H)], &[(1.0, B), (1.0, H)], &[(0.0, C), (1.0, C)]],
    ),
    sk(
        'I',
        0.6,
        &[&[(0.5, B), (0.5, H)], &[(0.2, H), (0.8, H)], &[(0.2, B), (0.8, B)]],
    ),
    sk('J', 0.9, &[&[(1.0, H), (1.0, 0.15), (0.8, B), (0.2, B), (0.0, 0.15)]]),
    sk(
        'K',
        1.0,
        &[&[(0.0, B), (0.0, H)], &[(1.0, H), (0.0, 0.3)], &[(0.3, 0.42), (1.0, B)]],
    ),
    sk('L', 0.9, &[&[(0.0, H), (0.0, B), (1.0, B)]]),
    sk('M', 1.3, &[&[(0.0, B), (0.0, H), (0.5, 0.3), (1.0, H), (1.0, B)]]),
    sk('N', 1.05, &[&[(0.0, B), (0.0, H), (1.0, B), (1.0, H)]]),
    sk('O', 1.1, &[CAP_O]),
    sk('P', 1.0, &[CAP_P]),
    sk('Q', 1.1, &[CAP_O, &[(0.6, 0.2), (1.0, -0.05)]]),
    sk('R', 1.0, &[CAP_P, &[(0.5, C), (1.0, B)]]),
    sk(
        'S',
        1.0,
        &[&[
            (1.0, 0.6),
            (0.8, H),
            (0.2, H),
            (0.0, 0.58),
            (0.0, 0.45),
            (0.2, C),
            (0.8, C),
            (1.0, 0.25),
            (1.0, 0.1),
            (0.8, B),
            (0.2, B),
            (0.0, 0.1),
        ]],
    ),
    sk('T', 1.0, &[&[(0.0, H), (1.0, H)], &[(0.5, H), (0.5, B)]]),
    sk(
        'U',
        1.05,
        &[&[(0.0, H), (0.0, 0.15), (0.2, B), (0.8, B), (1.0, 0.15), (1.0, H)]],
    ),
    sk('V', 1.05, &[&[(0.0, H), (0.5, B), (1.0, H)]]),
    sk('W', 1.35, &[&[(0.0, H), (0.25, B), (0.5, 0.45), (0.75, B), (1.0, H)]]),
    sk('X', 1.0, &[&[(0.0, H), (1.0, B)], &[(1.0, H), (0.0, B)]]),
    sk('Y', 1.0, &[&[(0.0, H), (0.5, C), (1.0, H)], &[(0.5, C), (0.5, B)]]),
    sk('Z', 1.0, &[&[(0.0, H), (1.0, H), (0.0, B), (1.0, B)]]),
    sk('.', 0.3, &[BASE_DOT]),
    sk(',', 0.3, &[COMMA]),
    sk(';', 0.3, &[&[(0.5, 0.4)], COMMA]),
    sk(':', 0.3, &[&[(0.5, 0.4)], BASE_DOT]),
    sk('!', 0.3, &[&[(0.5, H), (0.5, 0.2)], BASE_DOT]),
    sk(
        '?',
        0.8,
        &[
            &[
                (0.0, 0.58),
                (0.2, H),
                (0.8, H),
                (1.0, 0.58),
                (1.0, 0.48),
                (0.5, C),
                (0.5, 0.2),
            ],
            BASE_DOT,
        ],
    ),
    sk('-', 0.6, &[&[(0.0, 0.28), (1.0, 0.28)]]),
];

/// Style parameters of one synthetic font, in em.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrokeStyle {
    /// Stroke thickness.
    pub weight: f64,
    /// Horizontal stretch of every glyph.
    pub width: f64,
    /// Half-length of the horizontal serifs at stem ends; 0 for sans.
    pub serif: f64,
}

impl StrokeStyle {
    pub const WEIGHT_RANGE: (f64, f64) = (0.04, 0.12);
    pub const WIDTH_RANGE: (f64, f64) = (0.75, 1.15);
    pub const SERIF_RANGE: (f64, f64) = (0.0, 0.06);

    fn random(rng: &mut ChaCha8Rng) -> Self {
        let mut draw = |(lo, hi): (f64, f64)| lo + (hi - lo) * rng.random::<f64>();
        Self {
            weight: draw(Self::WEIGHT_RANGE),
            width: draw(Self::WIDTH_RANGE),
            serif: draw(Self::SERIF_RANGE),
        }
    }
}

impl Default for StrokeStyle {
    fn default() -> Self {
        Self {
            weight: 0.08,
            width: 1.0,
            serif: 0.0,
        }
    }
}

/// Raster geometry of an atlas at a given point size (pixels per em).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtlasGeometry {
    pub point_size: u32,
    pub height: usize,
    pub width: usize,
    pub cell_width: usize,
    pub baseline_row: usize,
}

impl AtlasGeometry {
    /// At 40 pt this is the 2375 × 51 layout with 40-pixel cells.
    pub fn for_point_size(point_size: u32) -> Self {
        let ps = point_size as f64;
        let height = libm::ceil(ps * 1.275) as usize;
        Self {
            point_size,
            height,
            width: libm::round(ps * 59.375) as usize,
            cell_width: point_size as usize,
            baseline_row: height - libm::round(ps * 0.3) as usize,
        }
    }
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (qx, qy) = (a.0 + t * dx - p.0, a.1 + t * dy - p.1);
    libm::sqrt(qx * qx + qy * qy)
}

fn on_level(y: f64) -> bool {
    LEVELS.iter().any(|&l| (y - l).abs() < 1e-9)
}

/// Strokes of one glyph in em, with x measured from the ink's left edge.
fn glyph_segments(skeleton: &Skeleton, style: &StrokeStyle) -> Vec<((f64, f64), (f64, f64))> {
    let w = BASE_GLYPH_WIDTH * style.width * skeleton.width;
    let place = |(x, y): (f64, f64)| (style.serif + x * w, y);
    let mut segs = Vec::new();
    for stroke in skeleton.strokes {
        if stroke.len() == 1 {
            let p = place(stroke[0]);
            segs.push((p, p));
            continue;
        }
        for pair in stroke.windows(2) {
            segs.push((place(pair[0]), place(pair[1])));
        }
        if style.serif > 0.0 {
            for (end, next) in [
                (stroke[0], stroke[1]),
                (stroke[stroke.len() - 1], stroke[stroke.len() - 2]),
            ] {
                let vertical = (end.1 - next.1).abs() > (end.0 - next.0).abs();
                if vertical && on_level(end.1) {
                    let (x, y) = place(end);
                    segs.push(((x - style.serif, y), (x + style.serif, y)));
                }
            }
        }
    }
    segs
}

/// Renders one font into an atlas with the standard inventory.
pub fn render_atlas(
    font_name: &str,
    style: &StrokeStyle,
    geometry: &AtlasGeometry,
) -> Result<GlyphAtlas, FontSpaceError> {
    let ps = geometry.point_size as f64;
    let half = style.weight / 2.0;
    let dot_radius = half * 1.3;
    let mut pixels = vec![0u8; geometry.height * geometry.width];
    let mut glyphs = Vec::with_capacity(SKELETONS.len());
    for (g, skeleton) in SKELETONS.iter().enumerate() {
        let start = g * geometry.cell_width;
        let end = start + geometry.cell_width;
        let segs = glyph_segments(skeleton, style);
        // ink begins one side bearing plus half a stroke into the cell
        let origin = SIDE_BEARING + half;
        for row in 0..geometry.height {
            let y = (geometry.baseline_row as f64 - row as f64 - 0.5) / ps;
            for col in start..end.min(geometry.width) {
                let x = (col - start) as f64 + 0.5;
                let x = x / ps - origin;
                let mut coverage = 0.0f64;
                for &(a, b) in &segs {
                    let r = if a == b { dot_radius } else { half };
                    let d = segment_distance((x, y), a, b);
                    coverage = coverage.max((r - d) * ps + 0.5);
                }
                pixels[row * geometry.width + col] = libm::round(coverage.clamp(0.0, 1.0) * 255.0) as u8;
            }
        }
        let ink_width = 2.0 * style.serif + BASE_GLYPH_WIDTH * style.width * skeleton.width + style.weight;
        glyphs.push(GlyphMetrics {
            ch: skeleton.ch,
            span: [start, end],
            advance: libm::round((2.0 * SIDE_BEARING + ink_width) * UNITS_PER_EM),
            lsb: libm::round(SIDE_BEARING * UNITS_PER_EM),
        });
    }
    GlyphAtlas::new(
        String::from(font_name),
        geometry.point_size,
        UNITS_PER_EM,
        geometry.height,
        geometry.width,
        geometry.baseline_row,
        pixels,
        glyphs,
    )
}

/// One generated corpus font.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticFont {
    pub style: StrokeStyle,
    pub atlas: GlyphAtlas,
}

/// `n_fonts` fonts with seeded random styles.
pub fn synthetic_corpus(n_fonts: usize, point_size: u32, seed: u64) -> Result<Vec<SyntheticFont>, FontSpaceError> {
    let geometry = AtlasGeometry::for_point_size(point_size);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_fonts)
        .map(|i| {
            let style = StrokeStyle::random(&mut rng);
            let atlas = render_atlas(&format!("Synthetic {i:02}"), &style, &geometry)?;
            Ok(SyntheticFont { style, atlas })
        })
        .collect()
}
