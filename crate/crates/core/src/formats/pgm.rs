//! Binary PGM (P5) for 32×100 images.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::dsp::{SpectrogramImage, IMAGE_COLS, IMAGE_ROWS};
use crate::error::{Error, Result};

pub const PGM_HEADER: &[u8] = b"P5\n100 32\n255\n";

pub fn write_pgm<W: Write>(image: &SpectrogramImage, mut out: W) -> Result<()> {
    out.write_all(PGM_HEADER)?;
    out.write_all(image.pixels())?;
    Ok(())
}

pub fn write_pgm_file(image: &SpectrogramImage, path: &Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(PGM_HEADER.len() + image.pixels().len());
    write_pgm(image, &mut bytes)?;
    fs::write(path, bytes)?;
    Ok(())
}

/// Parses a P5 image with maxval 255 and exactly 100×32 pixels. Header
/// comments (`#` to end of line) are accepted.
pub fn read_pgm(bytes: &[u8], source: &Path) -> Result<SpectrogramImage> {
    let fail = |m: &str| Error::format(source, m);
    let mut pos = 0;
    let mut token = |bytes: &[u8]| -> Option<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        (pos > start).then(|| String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    if token(bytes).as_deref() != Some("P5") {
        return Err(fail("not a binary PGM (P5)"));
    }
    let mut number = |what: &str| -> Result<usize> {
        token(bytes).and_then(|t| t.parse().ok()).ok_or_else(|| fail(&format!("missing or malformed {what}")))
    };
    let (width, height, maxval) = (number("width")?, number("height")?, number("maxval")?);
    if (width, height) != (IMAGE_COLS, IMAGE_ROWS) {
        return Err(fail(&format!("image is {width}×{height}, expected {IMAGE_COLS}×{IMAGE_ROWS}")));
    }
    if maxval != 255 {
        return Err(fail(&format!("maxval {maxval}, expected 255")));
    }
    // exactly one whitespace byte separates the header from the raster
    let raster = bytes.get(pos + 1..).unwrap_or(&[]);
    if raster.len() != width * height {
        return Err(fail(&format!("raster has {} bytes, expected {}", raster.len(), width * height)));
    }
    SpectrogramImage::new(raster.to_vec(), None)
}

pub fn read_pgm_file(path: &Path) -> Result<SpectrogramImage> {
    let bytes = fs::read(path).map_err(|e| Error::format(path, e.to_string()))?;
    read_pgm(&bytes, path)
}
