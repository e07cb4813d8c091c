//! `ROMB` binary matrix files.
//!
//! Layout: magic `ROMB`, `u32` version, `u64` rows, `u64` cols, then the
//! entries column-major as little-endian `f64`.

use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Result, RomError};

pub const MAGIC: [u8; 4] = *b"ROMB";
pub const VERSION: u32 = 1;
const HEADER: usize = 4 + 4 + 8 + 8;

pub fn encode_matrix(m: &DMatrix<f64>) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER + 8 * m.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(m.nrows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.ncols() as u64).to_le_bytes());
    // nalgebra storage is already column-major
    for v in m.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Inverse of [`encode_matrix`]; the error string names the first defect found.
pub fn decode_matrix(bytes: &[u8]) -> std::result::Result<DMatrix<f64>, String> {
    if bytes.len() < HEADER {
        return Err(format!("{} bytes is shorter than the {HEADER}-byte header", bytes.len()));
    }
    if bytes[..4] != MAGIC {
        return Err(format!("bad magic {:?}", &bytes[..4]));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(format!("unsupported version {version}"));
    }
    let rows = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let cols = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(8))
        .filter(|&n| n <= usize::MAX as u64)
        .ok_or_else(|| format!("{rows} x {cols} overflows"))? as usize;
    let payload = &bytes[HEADER..];
    if payload.len() != expected {
        return Err(format!("payload is {} bytes, {rows} x {cols} needs {expected}", payload.len()));
    }
    let data = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok(DMatrix::from_vec(rows as usize, cols as usize, data))
}

pub fn write_matrix(path: impl AsRef<Path>, m: &DMatrix<f64>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_matrix(m)).map_err(|e| RomError::io(path, e))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| RomError::io(path, e))?;
    decode_matrix(&bytes).map_err(|message| RomError::Format { path: path.into(), message })
}

/// Stacks equally long vectors as the columns of a matrix.
pub fn columns_to_matrix(cols: &[Vec<f64>]) -> DMatrix<f64> {
    let rows = cols.first().map_or(0, Vec::len);
    DMatrix::from_iterator(rows, cols.len(), cols.iter().flat_map(|c| c.iter().copied()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_is_little_endian() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let b = encode_matrix(&m);
        assert_eq!(&b[..4], b"ROMB");
        assert_eq!(b[4..8], [1, 0, 0, 0]);
        assert_eq!(b[8..16], [2, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(b[16..24], [3, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(b.len(), 24 + 48);
        // second stored entry is (1, 0)
        assert_eq!(f64::from_le_bytes(b[32..40].try_into().unwrap()), 4.0);
    }

    #[test]
    fn rejects_malformed_input() {
        let good = encode_matrix(&DMatrix::from_element(2, 2, 1.5));
        assert!(decode_matrix(&good[..10]).is_err());
        assert!(decode_matrix(&good[..good.len() - 1]).is_err());
        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(decode_matrix(&bad).unwrap_err().contains("magic"));
        let mut bad = good;
        bad[4] = 2;
        assert!(decode_matrix(&bad).unwrap_err().contains("version"));
    }

    #[test]
    fn empty_shapes_round_trip() {
        for (r, c) in [(0, 0), (0, 4), (5, 0)] {
            let m = DMatrix::<f64>::zeros(r, c);
            assert_eq!(decode_matrix(&encode_matrix(&m)).unwrap().shape(), (r, c));
        }
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_identical(
            rows in 0usize..6,
            cols in 0usize..6,
            bits in proptest::collection::vec(any::<u64>(), 36),
        ) {
            let m = DMatrix::from_fn(rows, cols, |i, j| f64::from_bits(bits[i * 6 + j]));
            let back = decode_matrix(&encode_matrix(&m)).unwrap();
            prop_assert_eq!(back.shape(), m.shape());
            for (a, b) in m.iter().zip(back.iter()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
