//! `UWBF` frame files.
//!
//! Layout, little-endian: magic `UWBF`, u32 version, f64 center frequency,
//! f64 bandwidth, f64 slow-time sampling rate, f64 range spacing, u32 n_t,
//! u32 n_r, then n_t·n_r f32 samples, time-major. The range axis starts at 0.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::dsp::RawFrameSeries;
use crate::error::{Error, Result};
use crate::params::RadarParams;

pub const FRAME_MAGIC: &[u8; 4] = b"UWBF";
pub const FRAME_VERSION: u32 = 1;
pub const FRAME_HEADER_LEN: usize = 48;

pub fn write_frames<W: Write>(series: &RawFrameSeries, mut out: W) -> Result<()> {
    let p = series.params();
    let mut header = Vec::with_capacity(FRAME_HEADER_LEN);
    header.extend_from_slice(FRAME_MAGIC);
    header.extend_from_slice(&FRAME_VERSION.to_le_bytes());
    for v in [p.center_frequency, p.bandwidth, p.sampling_rate(), p.range_sampling_interval] {
        header.extend_from_slice(&v.to_le_bytes());
    }
    let dim = |n: usize| u32::try_from(n).map_err(|_| Error::GridMismatch(format!("dimension {n} too large for a frame file")));
    header.extend_from_slice(&dim(series.n_times())?.to_le_bytes());
    header.extend_from_slice(&dim(series.n_ranges())?.to_le_bytes());
    out.write_all(&header)?;
    let mut payload = Vec::with_capacity(series.samples().len() * 4);
    for &v in series.samples() {
        payload.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out.write_all(&payload)?;
    out.flush()?;
    Ok(())
}

pub fn write_frame_file(series: &RawFrameSeries, path: &Path) -> Result<()> {
    write_frames(series, BufWriter::new(File::create(path)?))
}

/// Reads a frame file. Carrier, bandwidth, sampling rate and range spacing
/// come from the header; the observation time is n_t/f_s; the remaining
/// fields (propagation speed, window width, beamwidths) come from `base`.
pub fn read_frames<R: Read>(mut input: R, base: &RadarParams, source: &Path) -> Result<RawFrameSeries> {
    let fail = |m: String| Error::format(source, m);
    let mut header = [0u8; FRAME_HEADER_LEN];
    input.read_exact(&mut header).map_err(|e| fail(format!("truncated header ({e})")))?;
    if &header[..4] != FRAME_MAGIC {
        return Err(fail(format!("bad magic {:?}, expected UWBF", &header[..4])));
    }
    let u32_at = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(header[o..o + 8].try_into().unwrap());
    let version = u32_at(4);
    if version != FRAME_VERSION {
        return Err(fail(format!("unsupported frame file version {version}")));
    }
    let sampling_rate = f64_at(24);
    let n_t = u32_at(40) as usize;
    let n_r = u32_at(44) as usize;
    let params = RadarParams {
        center_frequency: f64_at(8),
        bandwidth: f64_at(16),
        time_sampling_interval: 1.0 / sampling_rate,
        range_sampling_interval: f64_at(32),
        observation_time: n_t as f64 / sampling_rate,
        ..*base
    };
    params.validate().map_err(|e| fail(format!("header parameters: {e}")))?;

    let mut payload = Vec::new();
    input.read_to_end(&mut payload)?;
    if payload.len() != n_t * n_r * 4 {
        return Err(fail(format!("payload is {} bytes, header declares {n_t}×{n_r} samples ({} bytes)", payload.len(), n_t * n_r * 4)));
    }
    let samples = payload.chunks_exact(4).map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap()))).collect();
    RawFrameSeries::new(params, n_t, n_r, 0.0, samples)
}

pub fn read_frame_file(path: &Path, base: &RadarParams) -> Result<RawFrameSeries> {
    let file = File::open(path).map_err(|e| Error::format(path, e.to_string()))?;
    read_frames(BufReader::new(file), base, path)
}
