//! Learned font spaces as a single JSON document.

use std::fs;
use std::path::Path;

use adaptifont_core::fontspace::{CorpusLayout, FontBasis};
use adaptifont_core::linalg::Matrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `basis` is k×D and `coords` n×k, both row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisDocument {
    pub k: usize,
    #[serde(rename = "D")]
    pub dim: usize,
    pub layout: CorpusLayout,
    pub basis: Vec<f64>,
    pub coords: Vec<f64>,
    pub corpus_font_names: Vec<String>,
}

impl From<&FontBasis> for BasisDocument {
    fn from(b: &FontBasis) -> Self {
        Self {
            k: b.k(),
            dim: b.dim(),
            layout: b.layout.clone(),
            basis: b.basis.as_slice().to_vec(),
            coords: b.coords.as_slice().to_vec(),
            corpus_font_names: b.font_names.clone(),
        }
    }
}

impl TryFrom<BasisDocument> for FontBasis {
    type Error = Error;

    fn try_from(doc: BasisDocument) -> Result<Self> {
        let n = doc.corpus_font_names.len();
        let bad = |what: String| Err(Error::Format(format!("basis document: {what}")));
        if doc.k == 0 {
            return bad("k must be positive".into());
        }
        if doc.dim != doc.layout.dim() {
            return bad(format!("D = {} but the layout describes {}", doc.dim, doc.layout.dim()));
        }
        if doc.basis.len() != doc.k * doc.dim {
            return bad(format!(
                "basis has {} values, expected k·D = {}",
                doc.basis.len(),
                doc.k * doc.dim
            ));
        }
        if doc.coords.len() != n * doc.k {
            return bad(format!(
                "coords has {} values, expected n·k = {}",
                doc.coords.len(),
                n * doc.k
            ));
        }
        if doc.basis.iter().chain(&doc.coords).any(|v| !v.is_finite() || *v < 0.0) {
            return bad("entries must be finite and nonnegative".into());
        }
        Ok(FontBasis {
            basis: Matrix::from_vec(doc.k, doc.dim, doc.basis),
            coords: Matrix::from_vec(n, doc.k, doc.coords),
            layout: doc.layout,
            font_names: doc.corpus_font_names,
        })
    }
}

pub fn write_basis(path: &Path, basis: &FontBasis) -> Result<()> {
    let json = serde_json::to_string(&BasisDocument::from(basis)).map_err(Error::json(path))?;
    fs::write(path, json).map_err(Error::io(path))
}

pub fn read_basis(path: &Path) -> Result<FontBasis> {
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    let doc: BasisDocument = serde_json::from_str(&text).map_err(Error::json(path))?;
    FontBasis::try_from(doc)
}
