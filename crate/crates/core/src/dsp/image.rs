use super::Spectrogram;
use crate::error::{Error, Result};
use crate::label::Label;

pub const IMAGE_ROWS: usize = 32;
pub const IMAGE_COLS: usize = 100;

/// 32×100 8-bit grayscale spectrogram image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectrogramImage {
    pixels: Vec<u8>,
    pub label: Option<Label>,
}

impl SpectrogramImage {
    pub fn new(pixels: Vec<u8>, label: Option<Label>) -> Result<Self> {
        if pixels.len() != IMAGE_ROWS * IMAGE_COLS {
            return Err(Error::WrongInputShape {
                expected: (IMAGE_ROWS, IMAGE_COLS),
                found: (pixels.len() / IMAGE_COLS, pixels.len() % IMAGE_COLS),
            });
        }
        Ok(SpectrogramImage { pixels, label })
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * IMAGE_COLS + col]
    }

    pub fn with_label(mut self, label: Label) -> Self {
        self.label = Some(label);
        self
    }
}

/// Quantizes a spectrogram into an image.
///
/// Columns are the frames centered on multiples of half a window: with a hop
/// of L/2 that is every frame, with a finer hop h every (L/2)/h-th frame.
/// Power is expressed in dB relative to the maximum of the selected frames,
/// clamped to `[-dynamic_range_db, 0]` and mapped linearly onto [0, 255]
/// (round half up). An all-zero spectrogram maps to an all-zero image.
pub fn to_image(spec: &Spectrogram, dynamic_range_db: f64) -> Result<SpectrogramImage> {
    if spec.doppler_bins() != IMAGE_ROWS {
        return Err(Error::WrongRowCount { expected: IMAGE_ROWS, found: spec.doppler_bins() });
    }
    if !(dynamic_range_db > 0.0) {
        return Err(Error::InvalidParams(format!("dynamic range must be positive, got {dynamic_range_db}")));
    }
    let half = spec.window_len / 2;
    if half == 0 || !half.is_multiple_of(spec.hop_samples) {
        return Err(Error::InvalidParams(format!("hop of {} samples does not divide half the window ({half} samples)", spec.hop_samples)));
    }
    let stride = half / spec.hop_samples;
    let available = spec.frames().div_ceil(stride);
    if available < IMAGE_COLS {
        return Err(Error::InsufficientFrames { needed: IMAGE_COLS, found: available });
    }

    let frames: Vec<usize> = (0..IMAGE_COLS).map(|c| c * stride).collect();
    let max = frames.iter().flat_map(|&f| (0..IMAGE_ROWS).map(move |r| spec.get(r, f))).fold(0.0_f64, f64::max);

    let mut pixels = vec![0u8; IMAGE_ROWS * IMAGE_COLS];
    if max > 0.0 {
        for r in 0..IMAGE_ROWS {
            for (c, &f) in frames.iter().enumerate() {
                let db = (10.0 * (spec.get(r, f) / max).log10()).clamp(-dynamic_range_db, 0.0);
                let level = (db + dynamic_range_db) / dynamic_range_db * 255.0;
                pixels[r * IMAGE_COLS + c] = (level + 0.5).floor() as u8;
            }
        }
    }
    Ok(SpectrogramImage { pixels, label: None })
}
