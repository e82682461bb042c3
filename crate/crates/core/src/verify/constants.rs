use crate::error::{Error, Result};

/// Constants of the posterior concentration bound for the POI family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationConstants {
    pub b: f64,
    pub c0: f64,
    pub kappa: f64,
    pub delta_theta: f64,
    pub delta_p: f64,
}

/// Grid of `[lo, hi]` with spacing at most `step`, endpoints included.
fn grid(lo: f64, hi: f64, step: f64) -> impl Iterator<Item = f64> {
    let n = ((hi - lo) / step).ceil().max(1.0) as usize;
    (0..=n).map(move |i| lo + (hi - lo) * i as f64 / n as f64)
}

/// Evaluates `B`, `c0`, `kappa` and `Delta_theta` for support `thetas`,
/// true value `theta_star` and probability floor `delta_p`. The maximum over
/// `p in [delta_p, 1 - delta_p]` in `B` is taken on a grid of spacing
/// `resolution`.
pub fn concentration_constants(thetas: &[f64], theta_star: f64, delta_p: f64, resolution: f64) -> Result<ConcentrationConstants> {
    if thetas.len() < 2 {
        return Err(Error::Validation("need at least two parameter values".into()));
    }
    if !thetas.contains(&theta_star) {
        return Err(Error::Validation(format!("theta* = {theta_star} not in the support")));
    }
    if !(delta_p > 0.0 && delta_p < 0.5) {
        return Err(Error::Domain(format!("delta_p = {delta_p} outside (0, 0.5)")));
    }
    if !(resolution > 0.0) {
        return Err(Error::Domain("resolution must be positive".into()));
    }
    let max_t = thetas.iter().copied().fold(f64::MIN, f64::max);
    let min_t = thetas.iter().copied().fold(f64::MAX, f64::min);

    let mut m1 = 0.0f64;
    let mut m2 = 0.0f64;
    for p in grid(delta_p, 1.0 - delta_p, resolution) {
        let ps = p.powf(1.0 / theta_star);
        for &th in thetas {
            let pt = p.powf(1.0 / th);
            m1 = m1.max((pt / ps).ln().abs());
            m2 = m2.max(((1.0 - pt) / (1.0 - ps)).ln().abs());
        }
    }
    let c0 = f64::min(
        (1.0 / delta_p).ln() * delta_p,
        (1.0 / (1.0 - delta_p)).ln() * (1.0 - delta_p),
    ) / (max_t * max_t);
    let delta_theta = thetas
        .iter()
        .filter(|&&t| t != theta_star)
        .map(|t| (t - theta_star).abs())
        .fold(f64::MAX, f64::min);
    Ok(ConcentrationConstants {
        b: 2.0 * m1.max(m2),
        c0,
        kappa: (max_t - min_t).powi(2),
        delta_theta,
        delta_p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_support() {
        let c = concentration_constants(&[1.0, 2.0], 1.0, 0.1, 1e-4).unwrap();
        assert_eq!(c.kappa, 1.0);
        assert_eq!(c.delta_theta, 1.0);
        let expected_c0 = f64::min(10f64.ln() * 0.1, (1.0 / 0.9f64).ln() * 0.9) / 4.0;
        assert!((c.c0 - expected_c0).abs() < 1e-15);
        assert!((c.c0 - 0.0237).abs() < 1e-4);
    }

    #[test]
    fn first_term_of_b_is_at_the_floor() {
        // |1/theta - 1/theta*| ln(1/p) is largest at p = delta_p
        let c = concentration_constants(&[1.0, 2.0], 1.0, 0.1, 1e-3).unwrap();
        assert!(c.b >= 2.0 * 0.5 * 10f64.ln() - 1e-12);
    }

    #[test]
    fn grid_refinement_is_stable() {
        let coarse = concentration_constants(&[1.0, 2.0, 3.0], 2.0, 0.05, 1e-4).unwrap();
        let fine = concentration_constants(&[1.0, 2.0, 3.0], 2.0, 0.05, 1e-5).unwrap();
        assert!((coarse.b - fine.b).abs() < 1e-3);
    }

    #[test]
    fn invalid_inputs() {
        assert!(concentration_constants(&[1.0], 1.0, 0.1, 1e-3).is_err());
        assert!(concentration_constants(&[1.0, 2.0], 3.0, 0.1, 1e-3).is_err());
        assert!(concentration_constants(&[1.0, 2.0], 1.0, 0.6, 1e-3).is_err());
    }
}
