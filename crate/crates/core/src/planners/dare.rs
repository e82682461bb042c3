//! Discrete algebraic Riccati equation by fixed-point iteration.

use nalgebra::DMatrix;

use crate::environments::lq::spectral_radius_of;
use crate::error::{Error, Result};

const CONVERGENCE_TOL: f64 = 1e-10;
const MAX_ITER: usize = 200_000;
const DIVERGENCE_NORM: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct LqSolution {
    /// Cost-to-go matrix.
    pub p: DMatrix<f64>,
    /// Feedback gain; the optimal control is `u = -gain * x`.
    pub gain: DMatrix<f64>,
    /// Optimal average cost `trace(P W)`.
    pub avg_cost: f64,
    pub iterations: usize,
}

/// One application of the Riccati map.
pub fn riccati_map(
    p: &DMatrix<f64>,
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let gain = feedback_gain(p, a, b, r)?;
    let at_p = a.transpose() * p;
    let out = q + &at_p * a - &at_p * b * gain;
    Ok(symmetrize(out))
}

/// `(R + B'PB)^-1 B'PA`.
pub fn feedback_gain(
    p: &DMatrix<f64>,
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let bt_p = b.transpose() * p;
    let s = r + &bt_p * b;
    let rhs = &bt_p * a;
    s.cholesky()
        .map(|c| c.solve(&rhs))
        .ok_or_else(|| Error::planner("R + B'PB is not positive definite"))
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

pub fn solve_dare(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
    noise_cov: &DMatrix<f64>,
) -> Result<LqSolution> {
    let n = a.nrows();
    let d = b.ncols();
    if a.ncols() != n || b.nrows() != n || q.shape() != (n, n) || r.shape() != (d, d) || noise_cov.shape() != (n, n) {
        return Err(Error::dimension("inconsistent DARE operand shapes"));
    }
    let mut p = q.clone();
    for iter in 1..=MAX_ITER {
        let next = riccati_map(&p, a, b, q, r)?;
        let step = (&next - &p).norm();
        p = next;
        let size = p.norm();
        if !size.is_finite() || size > DIVERGENCE_NORM {
            return Err(Error::planner(format!(
                "Riccati iteration diverged after {iter} iterations (|P| = {size:e}); pair not stabilizable"
            )));
        }
        if step <= CONVERGENCE_TOL * (1.0 + size) {
            let gain = feedback_gain(&p, a, b, r)?;
            let closed = a - b * &gain;
            let rho = spectral_radius_of(&closed);
            if rho >= 1.0 {
                return Err(Error::planner(format!(
                    "closed-loop spectral radius {rho} is not below 1"
                )));
            }
            let avg_cost = (&p * noise_cov).trace();
            return Ok(LqSolution {
                p,
                gain,
                avg_cost,
                iterations: iter,
            });
        }
    }
    Err(Error::planner(format!(
        "Riccati iteration did not converge in {MAX_ITER} iterations"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eye(n: usize) -> DMatrix<f64> {
        DMatrix::identity(n, n)
    }

    fn residual(sol: &LqSolution, a: &DMatrix<f64>, b: &DMatrix<f64>, q: &DMatrix<f64>, r: &DMatrix<f64>) -> f64 {
        (riccati_map(&sol.p, a, b, q, r).unwrap() - &sol.p).norm()
    }

    #[test]
    fn zero_dynamics_gives_q() {
        let a = DMatrix::zeros(2, 2);
        let sol = solve_dare(&a, &eye(2), &eye(2), &eye(2), &eye(2)).unwrap();
        assert!((&sol.p - eye(2)).norm() < 1e-12);
        assert!(sol.gain.norm() < 1e-12);
        assert!((sol.avg_cost - 2.0).abs() < 1e-12);
    }

    #[test]
    fn scalar_closed_form() {
        // p = 1 + a^2 p - a^2 p^2 / (1 + p) with a = 0.5  =>  p^2 - 0.25 p - 1 = 0
        let root = (0.25 + (0.25f64 * 0.25 + 4.0).sqrt()) / 2.0;
        let a = DMatrix::from_element(1, 1, 0.5);
        let one = eye(1);
        let sol = solve_dare(&a, &one, &one, &one, &one).unwrap();
        assert!((sol.p[(0, 0)] - root).abs() < 1e-9);
        assert!((sol.gain[(0, 0)] - root * 0.5 / (1.0 + root)).abs() < 1e-9);
    }

    #[test]
    fn residual_and_stability_on_random_systems() {
        use crate::environments::LqSystem;
        for seed in 0..20 {
            let sys = LqSystem::random(3, 2, 1.2, 0.01, seed).unwrap();
            let sol = sys.optimal().unwrap();
            assert!(residual(&sol, &sys.a, &sys.b, &sys.q, &sys.r) <= 1e-8);
            assert!((&sol.p - sol.p.transpose()).amax() < 1e-8);
            let closed = &sys.a - &sys.b * &sol.gain;
            assert!(spectral_radius_of(&closed) < 1.0);
        }
    }

    #[test]
    fn unstabilizable_pair_fails() {
        // unstable mode with no actuation
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        let b = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let err = solve_dare(&a, &b, &eye(2), &eye(1), &eye(2)).unwrap_err();
        assert!(matches!(err, Error::Planner(_)));
    }
}
