//! Zero-mean Gaussian model of the embedding distribution.

use nalgebra::{Cholesky, DMatrix};

use crate::error::{Error, Result};
use crate::model::gemm::gemm;
use crate::model::EmbeddingVector;

/// Second-moment matrix of a set of embeddings and its regularized inverse.
#[derive(Clone, Debug)]
pub struct CovarianceModel {
    /// Sample covariance about the origin (row-major, exactly symmetric).
    pub sigma: DMatrix<f64>,
    /// Inverse of `sigma + ridge * I`.
    pub sigma_inv: DMatrix<f64>,
    pub ridge: f64,
}

impl CovarianceModel {
    pub fn dim(&self) -> usize {
        self.sigma.nrows()
    }
}

/// Accumulates `sum u u^T` over row-major blocks of vectors.
#[derive(Clone, Debug)]
pub struct CovarianceAccumulator {
    m: usize,
    sum: Vec<f64>,
    count: usize,
}

impl CovarianceAccumulator {
    pub fn new(m: usize) -> Self {
        Self { m, sum: vec![0.0; m * m], count: 0 }
    }

    /// Adds the rows of a `rows x m` row-major block.
    pub fn add_rows(&mut self, block: &[f64]) -> Result<()> {
        let m = self.m;
        if m == 0 || !block.len().is_multiple_of(m) {
            return Err(Error::DimensionMismatch { expected: m, found: block.len() % m.max(1) });
        }
        let rows = block.len() / m;
        // sum += block^T block
        gemm(m, rows, m, 1.0, block, (1, m), block, (m, 1), 1.0, &mut self.sum, (m, 1));
        self.count += rows;
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Finishes the estimate. `ridge = None` picks `1e-6 * trace / m`.
    pub fn finish(&self, ridge: Option<f64>) -> Result<CovarianceModel> {
        let m = self.m;
        if self.count < m + 1 {
            return Err(Error::InsufficientSamples { needed: m + 1, got: self.count });
        }
        let n = self.count as f64;
        let mut sigma = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = self.sum[i * m + j] / n;
                sigma[(i, j)] = v;
                sigma[(j, i)] = v;
            }
        }
        let ridge = ridge.unwrap_or_else(|| 1e-6 * sigma.trace() / m as f64);
        if !(ridge >= 0.0 && ridge.is_finite()) {
            return Err(Error::InvalidConfig(format!("ridge {ridge} must be finite and non-negative")));
        }
        let reg = &sigma + DMatrix::identity(m, m) * ridge;
        let chol = Cholesky::new(reg).ok_or(Error::SingularCovariance)?;
        let diag = chol.l_dirty().diagonal();
        let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &d| (lo.min(d), hi.max(d)));
        // Pivots this small mean the matrix is rank deficient up to rounding.
        if !(lo > 0.0) || lo * lo < 1e-13 * hi * hi {
            return Err(Error::SingularCovariance);
        }
        let mut sigma_inv = chol.inverse();
        for i in 0..m {
            for j in i + 1..m {
                let v = 0.5 * (sigma_inv[(i, j)] + sigma_inv[(j, i)]);
                sigma_inv[(i, j)] = v;
                sigma_inv[(j, i)] = v;
            }
        }
        Ok(CovarianceModel { sigma, sigma_inv, ridge })
    }
}

/// Covariance about the zero vector of `vectors`, inverted after adding
/// `ridge * I` (`None` picks `1e-6 * trace / m`).
pub fn estimate_covariance(vectors: &[EmbeddingVector], ridge: Option<f64>) -> Result<CovarianceModel> {
    let m = vectors.first().ok_or(Error::EmptyInput)?.dim();
    let mut flat = Vec::with_capacity(vectors.len() * m);
    for v in vectors {
        if v.dim() != m {
            return Err(Error::DimensionMismatch { expected: m, found: v.dim() });
        }
        flat.extend_from_slice(v.as_slice());
    }
    estimate_covariance_flat(&flat, m, ridge)
}

/// As [`estimate_covariance`] over a row-major `rows x m` matrix.
pub fn estimate_covariance_flat(rows: &[f64], m: usize, ridge: Option<f64>) -> Result<CovarianceModel> {
    let mut acc = CovarianceAccumulator::new(m);
    acc.add_rows(rows)?;
    acc.finish(ridge)
}

/// `u^T sigma_inv u`: large for vectors in low-density regions.
pub fn density_score(u: &EmbeddingVector, cov: &CovarianceModel) -> Result<f64> {
    if u.dim() != cov.dim() {
        return Err(Error::DimensionMismatch { expected: cov.dim(), found: u.dim() });
    }
    Ok(score_slice(u.as_slice(), &cov.sigma_inv))
}

pub(crate) fn score_slice(u: &[f64], sigma_inv: &DMatrix<f64>) -> f64 {
    let m = u.len();
    let mut total = 0.0;
    for i in 0..m {
        let mut row = 0.0;
        for j in 0..m {
            row += sigma_inv[(i, j)] * u[j];
        }
        total += u[i] * row;
    }
    total
}

/// Scores every row of a row-major `rows x m` block.
pub(crate) fn score_rows(block: &[f64], cov: &CovarianceModel, out: &mut Vec<f64>) {
    let m = cov.dim();
    let rows = block.len() / m;
    // t = block * sigma_inv, then row-wise dot with block
    let mut t = vec![0.0; block.len()];
    let inv: Vec<f64> = cov.sigma_inv.iter().copied().collect(); // column-major, symmetric
    gemm(rows, m, m, 1.0, block, (m, 1), &inv, (m, 1), 0.0, &mut t, (m, 1));
    out.extend(
        block
            .chunks_exact(m)
            .zip(t.chunks_exact(m))
            .map(|(u, tu)| u.iter().zip(tu).map(|(a, b)| a * b).sum::<f64>()),
    );
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(rows: usize, m: usize, seed: u64) -> Vec<f64> {
        let mut rng = rng_from_seed(seed);
        (0..rows * m).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn unit_gaussian_gives_identity() {
        let m = 6;
        let cov = estimate_covariance_flat(&gaussian(100_000, m, 1), m, Some(0.0)).unwrap();
        for i in 0..m {
            for j in 0..m {
                let expect = if i == j { 1.0 } else { 0.0 };
                // standard error of a second moment is about sqrt(2/N) ~ 0.0045
                assert!((cov.sigma[(i, j)] - expect).abs() < 0.025, "{i},{j}: {}", cov.sigma[(i, j)]);
            }
        }
        assert_eq!(cov.sigma, cov.sigma.transpose());
        let reg = &cov.sigma + DMatrix::identity(m, m) * cov.ridge;
        let prod = &cov.sigma_inv * reg;
        assert!((prod - DMatrix::identity(m, m)).amax() < 1e-8);
    }

    #[test]
    fn rank_requirements() {
        let m = 5;
        assert!(estimate_covariance_flat(&gaussian(m + 1, m, 2), m, Some(0.0)).is_ok());
        assert!(estimate_covariance_flat(&gaussian(m - 1, m, 3), m, Some(0.0)).is_err());
        // rank deficient but enough rows: every vector lies in a plane
        let mut flat = gaussian(50, m, 4);
        for row in flat.chunks_exact_mut(m) {
            row[m - 1] = row[0] + row[1];
        }
        assert!(matches!(estimate_covariance_flat(&flat, m, Some(0.0)), Err(Error::SingularCovariance)));
        assert!(estimate_covariance_flat(&flat, m, None).is_ok());
    }

    #[test]
    fn scores() {
        let m = 4;
        let mut acc = CovarianceAccumulator::new(m);
        let mut flat = Vec::new();
        for i in 0..8 {
            let mut row = vec![0.0; m];
            row[i % m] = if i < m { 2.0f64.sqrt() } else { -(2.0f64.sqrt()) };
            flat.extend(row);
        }
        acc.add_rows(&flat).unwrap();
        let cov = acc.finish(Some(0.0)).unwrap();
        // each axis: two rows with square 2, averaged over 8 rows
        assert!((cov.sigma.clone() - DMatrix::identity(m, m) * 0.5).amax() < 1e-15);
        let e0 = EmbeddingVector(vec![1.0, 0.0, 0.0, 0.0]);
        assert!((density_score(&e0, &cov).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(density_score(&EmbeddingVector(vec![0.0; m]), &cov).unwrap(), 0.0);
        assert!(density_score(&EmbeddingVector(vec![0.0; 3]), &cov).is_err());
    }

    #[test]
    fn score_order_is_reverse_density_order() {
        let m = 3;
        let data = gaussian(200, m, 5);
        let mut mixed = data.clone();
        for row in mixed.chunks_exact_mut(m) {
            row[1] += 0.5 * row[0];
            row[2] *= 3.0;
        }
        let cov = estimate_covariance_flat(&mixed, m, None).unwrap();
        let reg = &cov.sigma + DMatrix::identity(m, m) * cov.ridge;
        let det = reg.determinant();
        let inv = reg.try_inverse().unwrap();
        let pdf = |u: &[f64]| {
            let v = nalgebra::DVector::from_column_slice(u);
            let q = (v.transpose() * &inv * &v)[(0, 0)];
            (-0.5 * q).exp() / ((2.0 * std::f64::consts::PI).powi(m as i32) * det).sqrt()
        };
        let queries = gaussian(50, m, 6);
        let mut scores = Vec::new();
        score_rows(&queries, &cov, &mut scores);
        let mut by_score: Vec<usize> = (0..50).collect();
        by_score.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
        let mut by_pdf: Vec<usize> = (0..50).collect();
        by_pdf.sort_by(|&a, &b| pdf(&queries[a * m..(a + 1) * m]).total_cmp(&pdf(&queries[b * m..(b + 1) * m])));
        assert_eq!(by_score, by_pdf);
        for (i, row) in queries.chunks_exact(m).enumerate() {
            assert!((score_slice(row, &cov.sigma_inv) - scores[i]).abs() < 1e-9 * scores[i].max(1.0));
        }
    }
}
