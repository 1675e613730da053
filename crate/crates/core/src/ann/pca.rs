use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::AnnError;
use crate::linalg::{self, Matrix};

/// Projection onto the leading principal components of a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaTransform {
    mean: Vec<f64>,
    /// d×k, orthonormal columns.
    projection: Matrix,
    explained_variance: Vec<f64>,
}

impl PcaTransform {
    /// Keeps every coordinate: zero mean and identity projection.
    pub fn identity(d: usize) -> Self {
        PcaTransform {
            mean: alloc::vec![0.0; d],
            projection: Matrix::identity(d),
            explained_variance: alloc::vec![1.0; d],
        }
    }

    pub fn from_parts(mean: Vec<f64>, projection: Matrix, explained_variance: Vec<f64>) -> Result<Self, AnnError> {
        if projection.rows() != mean.len() {
            return Err(AnnError::Dimension { expected: mean.len(), got: projection.rows() });
        }
        if projection.cols() != explained_variance.len() {
            return Err(AnnError::Parts("one variance per component"));
        }
        if projection.cols() == 0 || projection.cols() > projection.rows() {
            return Err(AnnError::ComponentCount { k: projection.cols(), max: projection.rows() });
        }
        Ok(PcaTransform { mean, projection, explained_variance })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn projection(&self) -> &Matrix {
        &self.projection
    }

    pub fn explained_variance(&self) -> &[f64] {
        &self.explained_variance
    }

    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn output_dim(&self) -> usize {
        self.projection.cols()
    }

    /// `projectionᵀ·(v − mean)`, not normalized.
    pub fn project_raw(&self, v: &[f64]) -> Result<Vec<f64>, AnnError> {
        if v.len() != self.mean.len() {
            return Err(AnnError::Dimension { expected: self.mean.len(), got: v.len() });
        }
        let centered: Vec<f64> = v.iter().zip(&self.mean).map(|(x, m)| x - m).collect();
        Ok(self.projection.tmul_vec(&centered))
    }

    /// Projection followed by unit normalization. A zero projection is
    /// returned as is.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>, AnnError> {
        let mut z = self.project_raw(v)?;
        linalg::normalize_in_place(&mut z);
        Ok(z)
    }

    /// Maps a raw projection back to input space.
    pub fn reconstruct(&self, z: &[f64]) -> Result<Vec<f64>, AnnError> {
        if z.len() != self.output_dim() {
            return Err(AnnError::Dimension { expected: self.output_dim(), got: z.len() });
        }
        let mut x = self.projection.mul_vec(z);
        for (xi, m) in x.iter_mut().zip(&self.mean) {
            *xi += m;
        }
        Ok(x)
    }
}

/// Principal components of the rows of `data` from the eigendecomposition
/// of the sample covariance (denominator `n − 1`).
///
/// Components come in order of decreasing variance. Each is signed so that
/// its entry of largest magnitude is positive (first such entry on ties).
pub fn fit_pca(data: &Matrix, k: usize) -> Result<PcaTransform, AnnError> {
    let (n, d) = (data.rows(), data.cols());
    if n < 2 {
        return Err(AnnError::TooFewRows(n));
    }
    let max = (n - 1).min(d);
    if k == 0 || k > max {
        return Err(AnnError::ComponentCount { k, max });
    }

    let mut mean = alloc::vec![0.0; d];
    for i in 0..n {
        for (m, x) in mean.iter_mut().zip(data.row(i)) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut cov = Matrix::zeros(d, d);
    let mut c = alloc::vec![0.0; d];
    for i in 0..n {
        for ((ci, x), m) in c.iter_mut().zip(data.row(i)).zip(&mean) {
            *ci = x - m;
        }
        for a in 0..d {
            if c[a] == 0.0 {
                continue;
            }
            let row = cov.row_mut(a);
            for b in a..d {
                row[b] += c[a] * c[b];
            }
        }
    }
    let denom = (n - 1) as f64;
    for a in 0..d {
        for b in a..d {
            let v = cov[(a, b)] / denom;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }

    let (values, vectors) = linalg::symmetric_eigen(&cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));

    let mut projection = Matrix::zeros(d, k);
    let mut explained_variance = Vec::with_capacity(k);
    for (j, &src) in order.iter().take(k).enumerate() {
        let mut col = vectors.column(src);
        let mut lead = 0;
        for (i, x) in col.iter().enumerate() {
            if libm::fabs(*x) > libm::fabs(col[lead]) {
                lead = i;
            }
        }
        if col[lead] < 0.0 {
            col.iter_mut().for_each(|x| *x = -*x);
        }
        for (i, x) in col.into_iter().enumerate() {
            projection[(i, j)] = x;
        }
        // tiny negative eigenvalues are rounding noise on a PSD matrix
        explained_variance.push(values[src].max(0.0));
    }
    Ok(PcaTransform { mean, projection, explained_variance })
}

pub fn apply_pca(transform: &PcaTransform, v: &[f64]) -> Result<Vec<f64>, AnnError> {
    transform.apply(v)
}
