//! Glyph atlases on disk: a PGM raster plus a JSON metadata file.

use std::fs;
use std::path::{Path, PathBuf};

use adaptifont_core::fontspace::{GlyphAtlas, GlyphMetrics};
use serde::{Deserialize, Serialize};

use super::pgm::{read_pgm, write_pgm, GrayImage};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtlasMetadata {
    pub font_name: String,
    pub point_size: u32,
    pub units_per_em: f64,
    pub glyphs: Vec<GlyphMetrics>,
    /// Raster row of the baseline; inferred from the point size when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline_row: Option<usize>,
}

/// Baseline for atlases whose metadata omits it: descenders get 0.3 em.
pub fn default_baseline_row(height: usize, point_size: u32) -> usize {
    let descent = (0.3 * point_size as f64).round() as usize;
    height.saturating_sub(descent)
}

pub fn atlas_from_parts(image: GrayImage, meta: AtlasMetadata) -> Result<GlyphAtlas> {
    let baseline = meta
        .baseline_row
        .unwrap_or_else(|| default_baseline_row(image.height, meta.point_size));
    Ok(GlyphAtlas::new(
        meta.font_name,
        meta.point_size,
        meta.units_per_em,
        image.height,
        image.width,
        baseline,
        image.pixels,
        meta.glyphs,
    )?)
}

/// Reads and validates one atlas.
pub fn ingest_atlas(image_path: &Path, metadata_path: &Path) -> Result<GlyphAtlas> {
    let image = read_pgm(image_path)?;
    let text = fs::read_to_string(metadata_path).map_err(Error::io(metadata_path))?;
    let meta: AtlasMetadata = serde_json::from_str(&text).map_err(Error::json(metadata_path))?;
    atlas_from_parts(image, meta)
}

/// Reads every `<name>.json` + `<name>.pgm` pair in `dir`, sorted by name,
/// and checks each against the first.
pub fn ingest_corpus(dir: &Path) -> Result<Vec<GlyphAtlas>> {
    let mut metas: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(Error::io(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json") && p.with_extension("pgm").is_file())
        .collect();
    metas.sort();
    if metas.is_empty() {
        return Err(Error::Format(format!(
            "{}: no atlas pairs (name.pgm + name.json)",
            dir.display()
        )));
    }
    let atlases = metas
        .iter()
        .map(|m| ingest_atlas(&m.with_extension("pgm"), m))
        .collect::<Result<Vec<_>>>()?;
    for a in &atlases[1..] {
        a.check_against(&atlases[0])?;
    }
    Ok(atlases)
}

pub fn atlas_metadata(atlas: &GlyphAtlas) -> AtlasMetadata {
    AtlasMetadata {
        font_name: atlas.font_name().to_string(),
        point_size: atlas.point_size(),
        units_per_em: atlas.units_per_em(),
        glyphs: atlas.glyphs().to_vec(),
        baseline_row: Some(atlas.baseline_row()),
    }
}

/// Writes `<stem>.pgm` and `<stem>.json` into `dir`.
pub fn write_atlas(dir: &Path, stem: &str, atlas: &GlyphAtlas) -> Result<()> {
    let image = GrayImage {
        width: atlas.width(),
        height: atlas.height(),
        pixels: atlas.pixels().to_vec(),
    };
    write_pgm(&dir.join(format!("{stem}.pgm")), &image)?;
    let meta_path = dir.join(format!("{stem}.json"));
    let json = serde_json::to_string_pretty(&atlas_metadata(atlas)).map_err(Error::json(&meta_path))?;
    fs::write(&meta_path, json).map_err(Error::io(&meta_path))
}
