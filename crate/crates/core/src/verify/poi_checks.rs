use crate::environments::{poi_transition_probs, PoiModel};
use crate::error::{Error, Result};

/// `2 / e`.
pub const LIPSCHITZ_BOUND: f64 = 2.0 / std::f64::consts::E;

/// L1 distance between the transition rows of `(s, a)` under `theta` and
/// `theta_prime`, by direct summation.
pub fn poi_l1_distance(model: &PoiModel, s: usize, a: usize, theta: f64, theta_prime: f64) -> Result<f64> {
    let p = poi_transition_probs(model, s, a, theta)?;
    let q = poi_transition_probs(model, s, a, theta_prime)?;
    Ok(p.iter().zip(&q).map(|(x, y)| (x - y).abs()).sum())
}

/// Where a Lipschitz ratio was observed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzPoint {
    pub s: usize,
    pub a: usize,
    pub theta: f64,
    pub theta_prime: f64,
    /// Passive probability of following the recommendation.
    pub p: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzReport {
    pub comparisons: usize,
    pub max_ratio: f64,
    pub argmax: Option<LipschitzPoint>,
    /// First tuple exceeding `2/e |theta - theta'| + 1e-12`.
    pub violation: Option<LipschitzPoint>,
}

impl LipschitzReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks `||P(.|s,a,theta) - P(.|s,a,theta')||_1 <= 2/e |theta - theta'|`
/// for every `(s, a)` and every pair of distinct grid values.
pub fn check_lipschitz(model: &PoiModel, thetas: &[f64]) -> Result<LipschitzReport> {
    if let Some(&bad) = thetas.iter().find(|t| !(**t >= 1.0)) {
        return Err(Error::Domain(format!("theta {bad} below 1")));
    }
    let n = model.n_pois();
    let mut report = LipschitzReport {
        comparisons: 0,
        max_ratio: 0.0,
        argmax: None,
        violation: None,
    };
    for (i, &th) in thetas.iter().enumerate() {
        for &th2 in &thetas[i + 1..] {
            let gap = (th - th2).abs();
            if gap == 0.0 {
                continue;
            }
            for s in 0..n {
                for a in 0..n {
                    let d = poi_l1_distance(model, s, a, th, th2)?;
                    let point = LipschitzPoint {
                        s,
                        a,
                        theta: th,
                        theta_prime: th2,
                        p: model.passive(s, a),
                        ratio: d / gap,
                    };
                    report.comparisons += 1;
                    if point.ratio > report.max_ratio {
                        report.max_ratio = point.ratio;
                        report.argmax = Some(point);
                    }
                    if d > LIPSCHITZ_BOUND * gap + 1e-12 && report.violation.is_none() {
                        report.violation = Some(point);
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Bernoulli KL divergence `KL(q1 || q2)`.
pub fn bernoulli_kl(q1: f64, q2: f64) -> f64 {
    let term = |a: f64, b: f64| if a == 0.0 { 0.0 } else { a * (a / b).ln() };
    term(q1, q2) + term(1.0 - q1, 1.0 - q2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinskerCheck {
    pub kl: f64,
    pub bound: f64,
    pub ok: bool,
}

/// `KL(p^{1/theta*} || p^{1/theta}) >= 2 (p^{1/theta*} - p^{1/theta})^2`.
pub fn check_pinsker(p: f64, theta_star: f64, theta: f64) -> Result<PinskerCheck> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("p = {p} outside (0, 1)")));
    }
    if !(theta_star >= 1.0 && theta >= 1.0) {
        return Err(Error::Domain("thetas must be at least 1".into()));
    }
    let q1 = p.powf(1.0 / theta_star);
    let q2 = p.powf(1.0 / theta);
    let kl = bernoulli_kl(q1, q2);
    let bound = 2.0 * (q1 - q2).powi(2);
    Ok(PinskerCheck {
        kl,
        bound,
        ok: kl >= bound - 1e-12,
    })
}
