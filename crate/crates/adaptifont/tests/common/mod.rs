#![allow(dead_code)]

use std::sync::OnceLock;

use adaptifont::core::fontspace::{assemble_matrix, nmf, AlignmentScale, FontBasis, NmfOptions};
use adaptifont::core::synthetic::synthetic_corpus;

/// A small font space learned from a procedural stroke-font corpus.
pub fn small_basis() -> &'static FontBasis {
    static BASIS: OnceLock<FontBasis> = OnceLock::new();
    BASIS.get_or_init(|| {
        let atlases: Vec<_> = synthetic_corpus(10, 12, 2)
            .unwrap()
            .into_iter()
            .map(|f| f.atlas)
            .collect();
        let (x, layout) = assemble_matrix(&atlases, AlignmentScale::UnitsPerEm).unwrap();
        let fit = nmf(
            &x,
            3,
            None,
            &NmfOptions {
                max_iter: 300,
                ..NmfOptions::default()
            },
        )
        .unwrap();
        let names = atlases.iter().map(|a| a.font_name().to_string()).collect();
        let mut basis = FontBasis::new(fit, layout, names).unwrap();
        basis.normalize_coordinate_scale(13.5);
        basis
    })
}

/// Parses `M x y L x y … Z` path data into closed rings.
pub fn parse_path(d: &str) -> Vec<Vec<(f64, f64)>> {
    let mut rings = Vec::new();
    let mut cur: Vec<(f64, f64)> = Vec::new();
    let mut tokens = d.split_whitespace().peekable();
    while let Some(t) = tokens.next() {
        match t.chars().next() {
            Some('Z') => rings.push(std::mem::take(&mut cur)),
            Some('M') | Some('L') => {
                let x: f64 = t[1..].parse().expect("x");
                let y: f64 = tokens.next().expect("y").parse().expect("y");
                cur.push((x, y));
            }
            _ => panic!("unexpected token {t:?}"),
        }
    }
    assert!(cur.is_empty(), "unterminated subpath");
    rings
}
