use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::environments::lq::psd_sqrt;
use crate::error::{Error, Result};

/// Conjugate matrix-normal posterior for `x' = [A B] z + w` with `z = [x; u]`
/// and known noise covariance `W`.
///
/// `mean` stacks the coefficients as `[A B]^T`, an `(n+d) x n` matrix. The
/// covariance of the coefficients is `W (x) precision^-1`: rows share the
/// `(n+d) x (n+d)` precision and columns are correlated through `W`.
#[derive(Debug, Clone)]
pub struct GaussianLinearBelief {
    mean: DMatrix<f64>,
    precision: DMatrix<f64>,
    /// Factor of `precision`, kept current by rank-one updates.
    chol: Cholesky<f64, Dyn>,
    noise_cov: DMatrix<f64>,
    noise_sqrt: DMatrix<f64>,
}

impl GaussianLinearBelief {
    pub fn new(mean: DMatrix<f64>, precision: DMatrix<f64>, noise_cov: DMatrix<f64>) -> Result<Self> {
        let (rows, n) = mean.shape();
        if precision.shape() != (rows, rows) || noise_cov.shape() != (n, n) || rows < n {
            return Err(Error::dimension(format!(
                "mean {rows}x{n}, precision {:?}, noise {:?}",
                precision.shape(),
                noise_cov.shape()
            )));
        }
        let chol = precision
            .clone()
            .cholesky()
            .ok_or_else(|| Error::validation("prior precision must be positive definite"))?;
        let noise_sqrt = psd_sqrt(&noise_cov, "noise covariance")?;
        Ok(Self {
            mean,
            precision,
            chol,
            noise_cov,
            noise_sqrt,
        })
    }

    /// Zero-mean prior with precision `scale * I`.
    pub fn isotropic(n: usize, d: usize, scale: f64, noise_cov: DMatrix<f64>) -> Result<Self> {
        Self::new(
            DMatrix::zeros(n + d, n),
            DMatrix::identity(n + d, n + d) * scale,
            noise_cov,
        )
    }

    pub fn n(&self) -> usize {
        self.mean.ncols()
    }

    pub fn d(&self) -> usize {
        self.mean.nrows() - self.mean.ncols()
    }

    pub fn mean(&self) -> &DMatrix<f64> {
        &self.mean
    }

    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }

    pub fn noise_cov(&self) -> &DMatrix<f64> {
        &self.noise_cov
    }

    /// `ln det(precision)`; the coefficient covariance determinant falls as it grows.
    pub fn log_det_precision(&self) -> f64 {
        2.0 * self.chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>()
    }

    pub fn update(&self, x: &DVector<f64>, u: &DVector<f64>, next_x: &DVector<f64>) -> Result<Self> {
        let mut next = self.clone();
        next.update_in_place(x, u, next_x)?;
        Ok(next)
    }

    pub fn update_in_place(&mut self, x: &DVector<f64>, u: &DVector<f64>, next_x: &DVector<f64>) -> Result<()> {
        let (n, d) = (self.n(), self.d());
        if x.len() != n || u.len() != d || next_x.len() != n {
            return Err(Error::dimension(format!(
                "expected x in R^{n}, u in R^{d}; got {} and {}",
                x.len(),
                u.len()
            )));
        }
        let z = DVector::from_iterator(n + d, x.iter().chain(u.iter()).cloned());
        if z.iter().all(|&v| v == 0.0) {
            return Ok(());
        }
        if z.iter().chain(next_x.iter()).any(|v| !v.is_finite()) {
            return Err(Error::domain("non-finite observation"));
        }
        let info = &self.precision * &self.mean + &z * next_x.transpose();
        self.precision += &z * z.transpose();
        self.chol.rank_one_update(&z, 1.0);
        self.mean = self.chol.solve(&info);
        Ok(())
    }

    /// Draws `(A, B)` from the matrix-normal posterior.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let (n, d) = (self.n(), self.d());
        let z = DMatrix::from_fn(n + d, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        // L^-T Z has row covariance precision^-1
        let lt = self.chol.l().transpose();
        let rows = lt
            .solve_upper_triangular(&z)
            .ok_or_else(|| Error::Internal("singular Cholesky factor".into()))?;
        let theta = &self.mean + rows * &self.noise_sqrt;
        let a = theta.rows(0, n).transpose();
        let b = theta.rows(n, d).transpose();
        Ok((a, b))
    }
}
