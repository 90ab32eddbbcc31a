//! Raw embedding matrices for external plotting.
//!
//! The matrix file is row-major little-endian `f32`; a JSON sidecar carries
//! its shape, the row sequences and per-row flags.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExportSidecar {
    pub rows: usize,
    pub m: usize,
    /// What the rows are, e.g. `"all n=7"` or a codebook path.
    pub source: String,
    pub model_hash: String,
    pub sequences: Vec<String>,
    /// Row is a codeword of the supplied codebook.
    pub codeword: Vec<bool>,
    /// Row is neither a codeword nor within distance 2 of one.
    pub isolated: Vec<bool>,
    /// Position in the codebook's selection order, for codeword rows.
    pub selection_index: Vec<Option<usize>>,
}

/// Writes `matrix` (`rows x m`, row-major) as `f32` and the sidecar as JSON.
pub fn write_embedding_export(matrix: &[f64], sidecar: &ExportSidecar, matrix_path: &Path, sidecar_path: &Path) -> Result<()> {
    if matrix.len() != sidecar.rows * sidecar.m {
        return Err(Error::DimensionMismatch { expected: sidecar.rows * sidecar.m, found: matrix.len() });
    }
    let n = sidecar.rows;
    if [sidecar.sequences.len(), sidecar.codeword.len(), sidecar.isolated.len(), sidecar.selection_index.len()]
        .iter()
        .any(|&len| len != n)
    {
        return Err(Error::InvalidConfig("sidecar columns must have one entry per row".into()));
    }
    let mut bytes = Vec::with_capacity(matrix.len() * 4);
    for &x in matrix {
        bytes.extend_from_slice(&(x as f32).to_le_bytes());
    }
    fs::write(matrix_path, bytes)?;
    fs::write(sidecar_path, serde_json::to_vec_pretty(sidecar)?)?;
    Ok(())
}

pub fn read_matrix_f32(path: &Path) -> Result<Vec<f32>> {
    let bytes = fs::read(path)?;
    if bytes.len() % 4 != 0 {
        return Err(Error::ModelFormat("matrix file size is not a multiple of 4".into()));
    }
    Ok(bytes.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes"))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let (mp, sp) = (dir.path().join("e.f32"), dir.path().join("e.json"));
        let matrix = [0.1, -2.5, 1e-3, 7.0, 0.0, 3.25];
        let sidecar = ExportSidecar {
            rows: 3,
            m: 2,
            source: "test".into(),
            model_hash: "abc".into(),
            sequences: vec!["00".into(), "01".into(), "02".into()],
            codeword: vec![true, false, false],
            isolated: vec![false, false, true],
            selection_index: vec![Some(0), None, None],
        };
        write_embedding_export(&matrix, &sidecar, &mp, &sp).unwrap();
        let back = read_matrix_f32(&mp).unwrap();
        for (a, b) in matrix.iter().zip(&back) {
            assert_eq!(*a as f32, *b);
        }
        let parsed: ExportSidecar = serde_json::from_slice(&fs::read(&sp).unwrap()).unwrap();
        assert_eq!(parsed, sidecar);
        let bad = ExportSidecar { rows: 4, ..sidecar };
        assert!(write_embedding_export(&matrix, &bad, &mp, &sp).is_err());
    }
}
