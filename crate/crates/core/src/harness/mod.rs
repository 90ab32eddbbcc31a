//! Experiment plumbing shared by the command-line tool: run summaries, rate
//! tables, embedding exports and the segmented channel demo.

pub mod channel;
pub mod export;

use serde::{Deserialize, Serialize};

use crate::codebook::rate::{code_rate, redundancy_bits, reference_constants, reference_rate};
use crate::codebook::Codebook;
use crate::error::{Error, Result};

pub use channel::{simulate_message, ChannelReport, SegmentReport};
pub use export::{read_matrix_f32, write_embedding_export, ExportSidecar};

/// Mean, sample standard deviation and extremes of codebook sizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub n: usize,
    pub method: String,
    pub runs: usize,
    pub sizes: Vec<usize>,
    pub mean: f64,
    pub std: f64,
    pub min: usize,
    pub max: usize,
}

impl SizeSummary {
    pub fn from_sizes(n: usize, method: &str, sizes: &[usize]) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::EmptyInput);
        }
        let k = sizes.len() as f64;
        let mean = sizes.iter().sum::<usize>() as f64 / k;
        let std = if sizes.len() > 1 {
            (sizes.iter().map(|&s| (s as f64 - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
        } else {
            0.0
        };
        Ok(Self {
            n,
            method: method.to_string(),
            runs: sizes.len(),
            sizes: sizes.to_vec(),
            mean,
            std,
            min: *sizes.iter().min().expect("nonempty"),
            max: *sizes.iter().max().expect("nonempty"),
        })
    }

    /// Recomputes the summary from codebooks (all of one length).
    pub fn from_codebooks(books: &[Codebook]) -> Result<Self> {
        let first = books.first().ok_or(Error::EmptyInput)?;
        if let Some(b) = books.iter().find(|b| b.n() != first.n()) {
            return Err(Error::InvalidConfig(format!("mixed lengths {} and {}", first.n(), b.n())));
        }
        let sizes: Vec<usize> = books.iter().map(Codebook::len).collect();
        Self::from_sizes(first.n(), first.provenance.method.tag(), &sizes)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateTableRow {
    pub n: usize,
    pub size: u64,
    pub rate: f64,
    pub redundancy_bits: f64,
    pub ref_c1: f64,
    pub ref_clog3: f64,
    pub ref_c2: f64,
    pub ref_c7: f64,
    /// `rate - ref_clog3`.
    pub gap_clog3: f64,
}

impl RateTableRow {
    pub fn new(n: usize, size: u64) -> Result<Self> {
        if size == 0 || n == 0 {
            return Err(Error::InvalidConfig(format!("rate needs size >= 1 and n >= 1, got {size}, {n}")));
        }
        let [c1, clog3, c2, c7] = reference_constants().map(|(_, c)| reference_rate(n, c));
        let rate = code_rate(size, n);
        Ok(Self {
            n,
            size,
            rate,
            redundancy_bits: redundancy_bits(size, n),
            ref_c1: c1,
            ref_clog3: clog3,
            ref_c2: c2,
            ref_c7: c7,
            gap_clog3: rate - clog3,
        })
    }
}

/// One row per `(n, size)`, sorted by `n`.
pub fn rate_table(entries: &[(usize, u64)]) -> Result<Vec<RateTableRow>> {
    let mut rows = entries.iter().map(|&(n, s)| RateTableRow::new(n, s)).collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| r.n);
    Ok(rows)
}

pub fn rate_table_csv(rows: &[RateTableRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_statistics() {
        let s = SizeSummary::from_sizes(7, "rand", &[250, 252, 254]).unwrap();
        assert_eq!(s.mean, 252.0);
        assert!((s.std - 2.0).abs() < 1e-12);
        assert_eq!((s.min, s.max), (250, 254));
        assert_eq!(SizeSummary::from_sizes(7, "rand", &[9]).unwrap().std, 0.0);
        assert!(SizeSummary::from_sizes(7, "rand", &[]).is_err());
    }

    #[test]
    fn rate_rows_and_csv() {
        let rows = rate_table(&[(11, 36368), (7, 275)]).unwrap();
        assert_eq!(rows[0].n, 7);
        assert!((rows[1].rate - 0.689).abs() < 1e-3);
        for r in &rows {
            assert!(r.ref_c1 > r.ref_clog3 && r.ref_clog3 > r.ref_c2 && r.ref_c2 > r.ref_c7);
        }
        let csv = rate_table_csv(&rows).unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "n,size,rate,redundancy_bits,ref_c1,ref_clog3,ref_c2,ref_c7,gap_clog3"
        );
        assert!(lines.next().unwrap().starts_with("7,275,"));
        assert!(RateTableRow::new(7, 0).is_err());
    }
}
