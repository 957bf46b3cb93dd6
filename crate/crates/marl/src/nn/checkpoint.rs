//! Binary parameter files: magic, version, tensor count, then per tensor a
//! `(rows, cols)` header followed by little-endian `f64` values.

use std::io::{Read, Write};
use std::path::Path;

use super::Tensor;
use crate::error::{MarlError, Result};

const MAGIC: &[u8; 8] = b"SWSECPRM";
pub const VERSION: u32 = 1;

pub fn write_tensors<W: Write>(mut w: W, tensors: &[&Tensor]) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(tensors.len() as u64).to_le_bytes())?;
    for t in tensors {
        w.write_all(&(t.nrows() as u64).to_le_bytes())?;
        w.write_all(&(t.ncols() as u64).to_le_bytes())?;
        for x in t.iter() {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

/// Reads into `tensors`, which fix the expected count and shapes. Nothing is
/// modified unless the whole file matches.
pub fn read_tensors<R: Read>(mut r: R, tensors: &mut [&mut Tensor]) -> Result<()> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(MarlError::Checkpoint("not a parameter file".into()));
    }
    let mut v = [0u8; 4];
    r.read_exact(&mut v)?;
    let version = u32::from_le_bytes(v);
    if version != VERSION {
        return Err(MarlError::Checkpoint(format!("unsupported version {version}")));
    }
    let count = read_u64(&mut r)? as usize;
    if count != tensors.len() {
        return Err(MarlError::Checkpoint(format!(
            "file holds {count} tensors, expected {}",
            tensors.len()
        )));
    }
    let mut loaded = Vec::with_capacity(count);
    for (i, t) in tensors.iter().enumerate() {
        let rows = read_u64(&mut r)? as usize;
        let cols = read_u64(&mut r)? as usize;
        if (rows, cols) != t.dim() {
            return Err(MarlError::Checkpoint(format!(
                "tensor {i}: file shape {rows}×{cols}, expected {}×{}",
                t.nrows(),
                t.ncols()
            )));
        }
        let mut data = vec![0.0; rows * cols];
        let mut b = [0u8; 8];
        for x in &mut data {
            r.read_exact(&mut b)?;
            *x = f64::from_le_bytes(b);
        }
        loaded.push(data);
    }
    for (t, data) in tensors.iter_mut().zip(loaded) {
        for (dst, src) in t.iter_mut().zip(data) {
            *dst = src;
        }
    }
    Ok(())
}

pub fn save(path: &Path, tensors: &[&Tensor]) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_tensors(std::io::BufWriter::new(f), tensors)
}

pub fn load(path: &Path, tensors: &mut [&mut Tensor]) -> Result<()> {
    let f = std::fs::File::open(path)?;
    read_tensors(std::io::BufReader::new(f), tensors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn round_trip() {
        let a = array![[1.0, -2.5], [3.0, 1e-300]];
        let b = array![[f64::MAX]];
        let mut buf = Vec::new();
        write_tensors(&mut buf, &[&a, &b]).unwrap();
        let (mut a2, mut b2) = (Array2::zeros((2, 2)), Array2::zeros((1, 1)));
        read_tensors(&buf[..], &mut [&mut a2, &mut b2]).unwrap();
        assert_eq!(a, a2);
        assert_eq!(b, b2);
    }

    #[test]
    fn shape_mismatch_rejected_without_side_effects() {
        let a = array![[1.0, 2.0]];
        let b = array![[3.0]];
        let mut buf = Vec::new();
        write_tensors(&mut buf, &[&a, &b]).unwrap();
        let mut a2 = Array2::zeros((1, 2));
        let mut wrong = Array2::zeros((2, 1));
        let err = read_tensors(&buf[..], &mut [&mut a2, &mut wrong]).unwrap_err();
        assert!(matches!(err, MarlError::Checkpoint(_)));
        assert!(a2.iter().all(|&v| v == 0.0));
        let mut only = Array2::zeros((1, 2));
        assert!(read_tensors(&buf[..], &mut [&mut only]).is_err());
        assert!(read_tensors(&b"garbage-file"[..], &mut [&mut only]).is_err());
    }
}
