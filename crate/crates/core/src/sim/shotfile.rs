//! `QSHOT1` binary shot files.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic        6 bytes  "QSHOT1"
//! n_qubits     u32
//! n_meas       u32
//! n_shots      u64
//! seed         u64
//! rows         n_shots × ceil(n_meas / 8) bytes, bit j of a row at byte j/8, bit j%8
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sim::run::ShotBatch;

pub const MAGIC: &[u8; 6] = b"QSHOT1";
pub const HEADER_LEN: usize = 6 + 4 + 4 + 8 + 8;

pub fn encode(batch: &ShotBatch) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + batch.rows().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(batch.n_qubits() as u32).to_le_bytes());
    out.extend_from_slice(&(batch.n_measurements() as u32).to_le_bytes());
    out.extend_from_slice(&(batch.shots() as u64).to_le_bytes());
    out.extend_from_slice(&batch.seed().to_le_bytes());
    out.extend_from_slice(batch.rows());
    out
}

pub fn decode(bytes: &[u8]) -> Result<ShotBatch> {
    if bytes.len() < HEADER_LEN || &bytes[..6] != MAGIC {
        return Err(Error::Format("not a QSHOT1 file".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes")) as usize;
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
    let n_qubits = u32_at(6);
    let n_meas = u32_at(10);
    let shots = usize::try_from(u64_at(14)).map_err(|_| Error::Format("shot count overflows".into()))?;
    let seed = u64_at(22);
    let body = &bytes[HEADER_LEN..];
    let expected = n_meas.div_ceil(8).checked_mul(shots).ok_or_else(|| Error::Format("size overflow".into()))?;
    if body.len() != expected {
        return Err(Error::Format(format!("QSHOT1 body has {} bytes, header implies {expected}", body.len())));
    }
    ShotBatch::from_rows(n_qubits, n_meas, seed, shots, body.to_vec())
}

/// Writes through a temporary sibling file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp-write");
    {
        let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
        f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn save(path: &Path, batch: &ShotBatch) -> Result<()> {
    write_atomic(path, &encode(batch))
}

pub fn load(path: &Path) -> Result<ShotBatch> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let batch = ShotBatch::from_bits(4, 77, &[vec![true; 10], vec![false; 10]]).unwrap();
        let bytes = encode(&batch);
        assert_eq!(&bytes[..6], b"QSHOT1");
        assert_eq!(bytes.len(), HEADER_LEN + 4);
        assert_eq!(decode(&bytes).unwrap(), batch);
    }

    #[test]
    fn truncated_body_rejected() {
        let batch = ShotBatch::from_bits(1, 0, &[vec![true; 3]]).unwrap();
        let mut bytes = encode(&batch);
        bytes.pop();
        assert!(matches!(decode(&bytes), Err(Error::Format(_))));
        assert!(decode(b"QSHOT2").is_err());
    }
}
