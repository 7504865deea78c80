//! Binary model file: `MDID`, u32 version, u32 n_out, u64 init_seed, then the
//! conv1, conv2 and fc tensors as f64, everything little-endian.

use std::io::{Read, Write};
use std::path::Path;

use super::{CnnModel, CONV1_LEN, CONV2_LEN, FEATURES};
use crate::error::{Error, Result};
use crate::label::Label;

pub const MODEL_MAGIC: &[u8; 4] = b"MDID";
pub const MODEL_VERSION: u32 = 1;

pub fn write_model<W: Write>(model: &CnnModel, mut out: W) -> Result<()> {
    out.write_all(MODEL_MAGIC)?;
    out.write_all(&MODEL_VERSION.to_le_bytes())?;
    out.write_all(&(model.n_out() as u32).to_le_bytes())?;
    out.write_all(&model.init_seed.to_le_bytes())?;
    let mut buf = Vec::with_capacity(8 * (model.conv1.len() + model.conv2.len() + model.fc.len()));
    for v in model.conv1.iter().chain(&model.conv2).chain(&model.fc) {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

fn read_array<const N: usize, R: Read>(input: &mut R) -> std::io::Result<[u8; N]> {
    let mut b = [0u8; N];
    input.read_exact(&mut b)?;
    Ok(b)
}

fn read_f64s<R: Read>(input: &mut R, n: usize) -> std::io::Result<Vec<f64>> {
    let mut bytes = vec![0u8; n * 8];
    input.read_exact(&mut bytes)?;
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

/// Reads a model; `source` names the input in error messages. Class labels
/// are restored as 1..=n_out.
pub fn read_model<R: Read>(mut input: R, source: &Path) -> Result<CnnModel> {
    let fail = |m: String| Error::format(source, m);
    let truncated = |e: std::io::Error| fail(format!("truncated model file ({e})"));
    let magic = read_array::<4, _>(&mut input).map_err(truncated)?;
    if &magic != MODEL_MAGIC {
        return Err(fail(format!("bad magic {magic:?}, expected MDID")));
    }
    let version = u32::from_le_bytes(read_array(&mut input).map_err(truncated)?);
    if version != MODEL_VERSION {
        return Err(fail(format!("unsupported model version {version}")));
    }
    let n_out = u32::from_le_bytes(read_array(&mut input).map_err(truncated)?);
    if !(2..=1024).contains(&n_out) {
        return Err(fail(format!("implausible class count {n_out}")));
    }
    let init_seed = u64::from_le_bytes(read_array(&mut input).map_err(truncated)?);
    let conv1 = read_f64s(&mut input, CONV1_LEN).map_err(truncated)?;
    let conv2 = read_f64s(&mut input, CONV2_LEN).map_err(truncated)?;
    let fc = read_f64s(&mut input, FEATURES * n_out as usize).map_err(truncated)?;
    let mut rest = [0u8; 1];
    if input.read(&mut rest)? != 0 {
        return Err(fail("trailing bytes after model payload".into()));
    }
    let labels = (1..=n_out).map(Label).collect();
    CnnModel::from_parts(conv1, conv2, fc, labels, init_seed).map_err(|e| fail(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let model = CnnModel::init(6, 77).unwrap();
        let mut bytes = Vec::new();
        write_model(&model, &mut bytes).unwrap();
        assert_eq!(bytes.len(), 4 + 4 + 4 + 8 + 8 * (1000 + 10_000 + 12_240));
        assert_eq!(&bytes[..4], b"MDID");
        let back = read_model(&bytes[..], Path::new("mem")).unwrap();
        assert_eq!(back, model);
        let mut again = Vec::new();
        write_model(&back, &mut again).unwrap();
        assert_eq!(again, bytes);
    }

    #[test]
    fn corrupt_files_rejected() {
        let model = CnnModel::init(3, 1).unwrap();
        let mut bytes = Vec::new();
        write_model(&model, &mut bytes).unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(read_model(&bad[..], Path::new("m")), Err(Error::Format { .. })));
        assert!(matches!(read_model(&bytes[..bytes.len() - 1], Path::new("m")), Err(Error::Format { .. })));
        let mut long = bytes.clone();
        long.push(0);
        assert!(read_model(&long[..], Path::new("m")).is_err());
    }
}
