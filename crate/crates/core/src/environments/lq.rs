//! Linear-quadratic system `x' = A x + B u + w`, `w ~ N(0, W)`, with stage
//! cost `x'Qx + u'Ru`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::planners::{solve_dare, LqSolution};
use crate::rng::SimRng;

#[derive(Debug, Clone)]
pub struct LqSystem {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub noise_cov: DMatrix<f64>,
    noise_sqrt: DMatrix<f64>,
}

impl LqSystem {
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        q: DMatrix<f64>,
        r: DMatrix<f64>,
        noise_cov: DMatrix<f64>,
    ) -> Result<Self> {
        let n = a.nrows();
        let d = b.ncols();
        if a.ncols() != n || b.nrows() != n {
            return Err(Error::dimension(format!(
                "A is {}x{}, B is {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols()
            )));
        }
        if q.shape() != (n, n) || r.shape() != (d, d) || noise_cov.shape() != (n, n) {
            return Err(Error::dimension("Q, R or noise covariance has the wrong shape"));
        }
        check_spd(&q, "Q")?;
        check_spd(&r, "R")?;
        let noise_sqrt = psd_sqrt(&noise_cov, "noise covariance")?;
        let sys = Self {
            a,
            b,
            q,
            r,
            noise_cov,
            noise_sqrt,
        };
        // stabilizability: the Riccati iteration must converge
        sys.optimal()?;
        Ok(sys)
    }

    /// `A` and `B` drawn from a standard normal with a fixed seed, `A` rescaled
    /// to spectral radius `spectral_radius`; `Q = I`, `R = I`, `W = noise * I`.
    pub fn random(n: usize, d: usize, spectral_radius: f64, noise: f64, seed: u64) -> Result<Self> {
        let mut rng = SimRng::seed_from_u64(seed);
        let mut draw = |rows, cols| {
            DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
        };
        let a0: DMatrix<f64> = draw(n, n);
        let b: DMatrix<f64> = draw(n, d);
        let rho = spectral_radius_of(&a0);
        let a = if rho > 0.0 { a0 * (spectral_radius / rho) } else { a0 };
        Self::new(
            a,
            b,
            DMatrix::identity(n, n),
            DMatrix::identity(d, d),
            DMatrix::identity(n, n) * noise,
        )
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn d(&self) -> usize {
        self.b.ncols()
    }

    pub fn optimal(&self) -> Result<LqSolution> {
        solve_dare(&self.a, &self.b, &self.q, &self.r, &self.noise_cov)
    }

    pub fn cost(&self, x: &DVector<f64>, u: &DVector<f64>) -> f64 {
        (x.transpose() * &self.q * x)[(0, 0)] + (u.transpose() * &self.r * u)[(0, 0)]
    }
}

/// One step of the true system: next state and the stage cost of `(x, u)`.
pub fn lq_step(
    sys: &LqSystem,
    x: &DVector<f64>,
    u: &DVector<f64>,
    rng: &mut SimRng,
) -> Result<(DVector<f64>, f64)> {
    if x.len() != sys.n() || u.len() != sys.d() {
        return Err(Error::dimension(format!(
            "state has {} entries (expected {}), control has {} (expected {})",
            x.len(),
            sys.n(),
            u.len(),
            sys.d()
        )));
    }
    let xi = DVector::from_fn(sys.n(), |_, _| StandardNormal.sample(rng));
    let next = &sys.a * x + &sys.b * u + &sys.noise_sqrt * xi;
    Ok((next, sys.cost(x, u)))
}

pub(crate) fn check_spd(m: &DMatrix<f64>, name: &str) -> Result<()> {
    if (m - m.transpose()).amax() > 1e-10 * (1.0 + m.amax()) {
        return Err(Error::validation(format!("{name} is not symmetric")));
    }
    let min_eig = m.clone().symmetric_eigen().eigenvalues.min();
    if min_eig <= 0.0 {
        return Err(Error::validation(format!(
            "{name} is not positive definite (smallest eigenvalue {min_eig})"
        )));
    }
    Ok(())
}

/// Symmetric square root of a positive-semidefinite matrix.
pub(crate) fn psd_sqrt(m: &DMatrix<f64>, name: &str) -> Result<DMatrix<f64>> {
    if (m - m.transpose()).amax() > 1e-10 * (1.0 + m.amax()) {
        return Err(Error::validation(format!("{name} is not symmetric")));
    }
    let eig = m.clone().symmetric_eigen();
    let scale = 1.0 + m.amax();
    if eig.eigenvalues.iter().any(|&v| v < -1e-12 * scale) {
        return Err(Error::validation(format!("{name} is not positive semidefinite")));
    }
    let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose())
}

pub fn spectral_radius_of(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;

    fn eye(n: usize) -> DMatrix<f64> {
        DMatrix::identity(n, n)
    }

    #[test]
    fn zero_dynamics() {
        let sys = LqSystem::new(
            DMatrix::zeros(2, 2),
            DMatrix::zeros(2, 2),
            eye(2),
            eye(2) * 2.0,
            DMatrix::zeros(2, 2),
        )
        .unwrap();
        let x = DVector::from_vec(vec![1.0, 2.0]);
        let u = DVector::from_vec(vec![0.5, -1.0]);
        let (next, cost) = lq_step(&sys, &x, &u, &mut seeded_rng(0)).unwrap();
        assert_eq!(next, DVector::zeros(2));
        assert!((cost - (5.0 + 2.0 * 1.25)).abs() < 1e-12);
    }

    #[test]
    fn noiseless_step_is_exact() {
        let sys = LqSystem::random(2, 2, 0.9, 0.0, 3).unwrap();
        let x = DVector::from_vec(vec![0.3, -0.7]);
        let u = DVector::from_vec(vec![1.0, 0.2]);
        let (next, _) = lq_step(&sys, &x, &u, &mut seeded_rng(0)).unwrap();
        let expected = &sys.a * &x + &sys.b * &u;
        assert!((next - expected).amax() < 1e-15);
    }

    #[test]
    fn identity_system_by_hand() {
        let sys = LqSystem::new(eye(2), eye(2), eye(2), eye(2), DMatrix::zeros(2, 2)).unwrap();
        let x = DVector::from_vec(vec![1.0, 0.0]);
        let u = DVector::zeros(2);
        let (next, cost) = lq_step(&sys, &x, &u, &mut seeded_rng(0)).unwrap();
        assert_eq!(next, x);
        assert_eq!(cost, 1.0);
    }

    #[test]
    fn dimension_mismatch() {
        let sys = LqSystem::random(2, 2, 0.9, 0.01, 3).unwrap();
        let x = DVector::zeros(3);
        let u = DVector::zeros(2);
        assert!(matches!(
            lq_step(&sys, &x, &u, &mut seeded_rng(0)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn rejects_indefinite_cost() {
        let mut q = eye(2);
        q[(1, 1)] = -1.0;
        assert!(LqSystem::new(eye(2), eye(2), q, eye(2), DMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn random_system_has_requested_radius() {
        let sys = LqSystem::random(2, 2, 0.95, 0.01, 11).unwrap();
        assert!((spectral_radius_of(&sys.a) - 0.95).abs() < 1e-9);
    }

    #[test]
    fn noise_has_requested_covariance() {
        let mut w = eye(2) * 0.04;
        w[(0, 1)] = 0.01;
        w[(1, 0)] = 0.01;
        let sys = LqSystem::new(DMatrix::zeros(2, 2), eye(2), eye(2), eye(2), w.clone()).unwrap();
        let mut rng = seeded_rng(9);
        let n = 50_000;
        let mut acc = DMatrix::zeros(2, 2);
        let x = DVector::zeros(2);
        let u = DVector::zeros(2);
        for _ in 0..n {
            let (next, _) = lq_step(&sys, &x, &u, &mut rng).unwrap();
            acc += &next * next.transpose();
        }
        acc /= n as f64;
        assert!((acc - w).amax() < 2e-3);
    }
}
