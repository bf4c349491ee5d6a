use serde::{Deserialize, Serialize};

/// Lipschitz constant as a function of `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GammaSchedule {
    Constant {
        gamma: f64,
    },
    /// `gamma_n = c_prime * n^delta * lambda^n`.
    Exponential {
        c_prime: f64,
        delta: f64,
        lambda: f64,
    },
}

impl GammaSchedule {
    pub fn at(&self, n: u32) -> f64 {
        match self {
            GammaSchedule::Constant { gamma } => *gamma,
            GammaSchedule::Exponential {
                c_prime,
                delta,
                lambda,
            } => c_prime * (n as f64).powf(*delta) * lambda.powi(n as i32),
        }
    }
}

/// A width bound `d_n^gamma < c0 [log2 n]^beta / n^alpha` (constant gamma)
/// or `c0 [log2 n]^beta / n^(2 alpha)` (exponential schedule).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WidthBound {
    pub n: u32,
    pub gamma: GammaSchedule,
    pub c0: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl WidthBound {
    pub fn value(&self) -> f64 {
        let n = self.n as f64;
        let power = match self.gamma {
            GammaSchedule::Constant { .. } => self.alpha,
            GammaSchedule::Exponential { .. } => 2.0 * self.alpha,
        };
        self.c0 * n.log2().powf(self.beta) / n.powf(power)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarlReport {
    pub n: u32,
    pub gamma: f64,
    pub width_value: f64,
    /// `ceil(n log2(3 gamma / eps))`.
    pub m: u64,
    /// `2 eps`, an upper bound on `eps_m`.
    pub implied_entropy_upper: f64,
    pub entropy_lower: f64,
    pub margin: f64,
    pub consistent: bool,
    /// The implied bound is no better than the radius.
    pub vacuous: bool,
}

/// Turn the width bound into `eps_m <= 2 eps` through the covering count
/// `N_{2 eps} <= (3 gamma / eps)^n <= 2^m`, then compare with a certified
/// lower bound on `eps_m`.
pub fn carl_transfer_check(
    bound: &WidthBound,
    radius: f64,
    entropy_lower: impl Fn(u64) -> f64,
) -> CarlReport {
    let eps = bound.value();
    let gamma = bound.gamma.at(bound.n);
    let bits = bound.n as f64 * (3.0 * gamma / eps).log2();
    let m = if bits > 0.0 { bits.ceil() as u64 } else { 0 };
    let implied = 2.0 * eps;
    let lower = entropy_lower(m);
    CarlReport {
        n: bound.n,
        gamma,
        width_value: eps,
        m,
        implied_entropy_upper: implied,
        entropy_lower: lower,
        margin: implied - lower,
        consistent: implied >= lower,
        vacuous: implied >= radius,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_inv_lower(m: u64) -> f64 {
        // Outer entropy of K(sigma) is at least half the inner value
        // 1 / log2(2^m + 1).
        let l = m as f64 + (-(m as f64)).exp2().ln_1p() / std::f64::consts::LN_2;
        0.5 / l * (1.0 - 1e-12)
    }

    #[test]
    fn consistent_bound_passes() {
        let b = WidthBound {
            n: 6,
            gamma: GammaSchedule::Constant { gamma: 3.0 },
            c0: 1.0 / 7f64.log2(),
            alpha: 1.0,
            beta: 0.0,
        };
        let r = carl_transfer_check(&b, 1.0, log_inv_lower);
        assert!(r.consistent && r.margin > 0.0);
        assert_eq!(r.m, (6.0 * (9.0 / b.value()).log2()).ceil() as u64);
    }

    #[test]
    fn fabricated_bound_flagged() {
        let b = WidthBound {
            n: 6,
            gamma: GammaSchedule::Constant { gamma: 3.0 },
            c0: 1e-4,
            alpha: 0.0,
            beta: 0.0,
        };
        let r = carl_transfer_check(&b, 1.0, log_inv_lower);
        assert!(!r.consistent);
    }

    #[test]
    fn radius_bound_is_vacuous() {
        let b = WidthBound {
            n: 3,
            gamma: GammaSchedule::Constant { gamma: 3.0 },
            c0: 1.0,
            alpha: 0.0,
            beta: 0.0,
        };
        let r = carl_transfer_check(&b, 1.0, log_inv_lower);
        assert!(r.consistent && r.vacuous);
    }

    #[test]
    fn exponential_schedule() {
        let g = GammaSchedule::Exponential {
            c_prime: 7.0,
            delta: 1.0,
            lambda: 2.0,
        };
        assert_eq!(g.at(3), 7.0 * 3.0 * 8.0);
        let b = WidthBound {
            n: 4,
            gamma: g,
            c0: 1.0,
            alpha: 1.0,
            beta: 1.0,
        };
        assert_eq!(b.value(), 2.0 / 16.0);
    }
}
