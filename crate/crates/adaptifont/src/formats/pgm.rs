//! Binary 8-bit grayscale PGM (`P5`, maxval 255).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read};
use std::path::Path;

use image::codecs::pnm::{PnmDecoder, PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ColorType, ExtendedColorType, ImageDecoder, ImageEncoder};

use crate::error::{Error, Result};

/// A row-major grayscale raster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

pub fn decode_pgm(bytes: &[u8], path: &Path) -> Result<GrayImage> {
    let malformed = |reason: String| Error::Image {
        path: path.to_path_buf(),
        reason,
    };
    if !bytes.starts_with(b"P5") {
        return Err(malformed("expected a binary PGM (P5) header".into()));
    }
    let decoder = PnmDecoder::new(bytes).map_err(|e| malformed(e.to_string()))?;
    if decoder.color_type() != ColorType::L8 {
        return Err(malformed(format!(
            "expected 8-bit grayscale, found {:?}",
            decoder.color_type()
        )));
    }
    let (w, h) = decoder.dimensions();
    let mut pixels = vec![0u8; decoder.total_bytes() as usize];
    decoder.read_image(&mut pixels).map_err(|e| malformed(e.to_string()))?;
    Ok(GrayImage {
        width: w as usize,
        height: h as usize,
        pixels,
    })
}

pub fn read_pgm(path: &Path) -> Result<GrayImage> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path).map_err(Error::io(path))?)
        .read_to_end(&mut bytes)
        .map_err(Error::io(path))?;
    decode_pgm(&bytes, path)
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = Vec::with_capacity(img.pixels.len() + 32);
    PnmEncoder::new(&mut out)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(&img.pixels, img.width as u32, img.height as u32, ExtendedColorType::L8)
        .expect("in-memory PGM encoding");
    out
}

pub fn write_pgm(path: &Path, img: &GrayImage) -> Result<()> {
    use std::io::Write;
    let mut w = BufWriter::new(File::create(path).map_err(Error::io(path))?);
    w.write_all(&encode_pgm(img)).map_err(Error::io(path))?;
    w.flush().map_err(Error::io(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let img = GrayImage {
            width: 3,
            height: 2,
            pixels: vec![0, 10, 255, 7, 8, 9],
        };
        let bytes = encode_pgm(&img);
        assert!(bytes.starts_with(b"P5"));
        assert_eq!(decode_pgm(&bytes, Path::new("x.pgm")).unwrap(), img);
    }

    #[test]
    fn rejects_ascii_and_truncated_files() {
        let p = Path::new("x.pgm");
        assert!(decode_pgm(b"P2\n2 1\n255\n0 0\n", p).is_err());
        assert!(decode_pgm(b"P5\n4 4\n255\n\x00\x01", p).is_err());
        assert!(decode_pgm(b"P5\n2 x\n255\n", p).is_err());
    }
}
