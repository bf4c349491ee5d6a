use serde::{Deserialize, Serialize};

use crate::covering::PackingBound;
use crate::error::{Error, Result};
use crate::metric::{FiniteSet, MetricSet, NormedSpace};

/// Largest `N` for which `sum sigma_j^n` is summed term by term.
pub const EXACT_SUM_MAX: usize = 1_000_000;

/// Decreasing null sequence `sigma_1 > sigma_2 > ... > 0`, 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Sigma {
    /// `1 / log2(j + 1)`.
    LogInv,
    /// `j^(-c)`.
    Power { c: f64 },
    /// Explicit finite list.
    Custom { values: Vec<f64> },
}

impl Sigma {
    pub fn validate(&self) -> Result<()> {
        match self {
            Sigma::LogInv => Ok(()),
            Sigma::Power { c } => {
                if c.is_finite() && *c > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidSequence(format!(
                        "power exponent must be positive, got {c}"
                    )))
                }
            }
            Sigma::Custom { values } => {
                if values.is_empty() {
                    return Err(Error::InvalidSequence("empty sequence".into()));
                }
                if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                    return Err(Error::InvalidSequence("terms must be positive".into()));
                }
                if values.windows(2).any(|w| !(w[1] < w[0])) {
                    return Err(Error::InvalidSequence(
                        "terms must be strictly decreasing".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// `sigma_j`, `j >= 1`. Panics past the end of a custom list.
    pub fn term(&self, j: usize) -> f64 {
        debug_assert!(j >= 1);
        match self {
            Sigma::LogInv => 1.0 / ((j as f64) + 1.0).log2(),
            Sigma::Power { c } => (j as f64).powf(-c),
            Sigma::Custom { values } => values[j - 1],
        }
    }

    /// Number of available terms (`None` for infinite generators).
    pub fn available(&self) -> Option<usize> {
        match self {
            Sigma::Custom { values } => Some(values.len()),
            _ => None,
        }
    }

    /// `sigma_N` for large `N` given as `log2 N`, for generators with a
    /// closed form.
    pub fn term_from_log2(&self, log2_n: f64) -> Option<f64> {
        match self {
            // log2(N + 1) = log2 N + log2(1 + 1/N).
            Sigma::LogInv => {
                Some(1.0 / (log2_n + (-log2_n).exp2().ln_1p() / std::f64::consts::LN_2))
            }
            Sigma::Power { c } => Some((-c * log2_n).exp2()),
            Sigma::Custom { .. } => None,
        }
    }

    /// `#{j : sigma_j > eps}`, capped at `cap`; exact for custom lists.
    pub fn count_above(&self, eps: f64, cap: usize) -> usize {
        match self {
            Sigma::Custom { values } => values.partition_point(|v| *v > eps).min(cap),
            _ => {
                let (mut lo, mut hi) = (0usize, cap);
                if hi == 0 || self.term(1) <= eps {
                    return 0;
                }
                if self.term(hi) > eps {
                    return hi;
                }
                lo += 1;
                // term(lo) > eps >= term(hi)
                while hi > lo + 1 {
                    let mid = lo + (hi - lo) / 2;
                    if self.term(mid) > eps {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSetSpec {
    pub sigma: Sigma,
    /// Truncation `M`.
    pub truncation: usize,
}

/// `{sigma_j e_j : j <= M} ∪ {0}` in the sup norm, through closed-form
/// distances. Index `j - 1` holds `sigma_j e_j`; index `M` is the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSet {
    pub sigma: Sigma,
    values: Vec<f64>,
}

/// Build the truncated sequence set.
pub fn sequence_set(spec: &SequenceSetSpec) -> Result<SequenceSet> {
    spec.sigma.validate()?;
    if spec.truncation < 2 {
        return Err(Error::InvalidSequence(
            "truncation must be at least 2".into(),
        ));
    }
    if let Some(k) = spec.sigma.available() {
        if spec.truncation > k {
            return Err(Error::InvalidSequence(format!(
                "truncation {} exceeds the {k} listed terms",
                spec.truncation
            )));
        }
    }
    let values: Vec<f64> = (1..=spec.truncation).map(|j| spec.sigma.term(j)).collect();
    if values.windows(2).any(|w| !(w[1] < w[0])) || values.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidSequence(
            "sequence is not strictly decreasing and positive over the truncation".into(),
        ));
    }
    Ok(SequenceSet {
        sigma: spec.sigma.clone(),
        values,
    })
}

impl SequenceSet {
    pub fn truncation(&self) -> usize {
        self.values.len()
    }

    pub fn origin(&self) -> usize {
        self.values.len()
    }

    /// `sigma_j`, `1 <= j <= M`.
    pub fn sigma(&self, j: usize) -> f64 {
        self.values[j - 1]
    }

    /// Dense copy in `l_inf^M`, for small truncations.
    pub fn to_dense(&self) -> FiniteSet {
        let m = self.values.len();
        let mut points: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                let mut p = vec![0.0; m];
                p[i] = self.values[i];
                p
            })
            .collect();
        points.push(vec![0.0; m]);
        FiniteSet::new(NormedSpace::linf(m), points).expect("well-formed")
    }

    fn level(&self, i: usize) -> f64 {
        if i == self.origin() {
            0.0
        } else {
            self.values[i]
        }
    }

    /// First index whose term is `<= eps`.
    fn first_within(&self, eps: f64) -> usize {
        self.values.partition_point(|v| *v > eps)
    }
}

impl MetricSet for SequenceSet {
    fn len(&self) -> usize {
        self.values.len() + 1
    }

    fn distance(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            self.level(i).max(self.level(j))
        }
    }

    fn neighbors_within(&self, i: usize, eps: f64) -> Vec<usize> {
        if self.level(i) > eps {
            return vec![i];
        }
        let t = self.first_within(eps);
        (t..=self.origin()).collect()
    }

    fn count_within(&self, i: usize, eps: f64) -> usize {
        if self.level(i) > eps {
            1
        } else {
            self.origin() + 1 - self.first_within(eps)
        }
    }

    fn distance_levels(&self) -> Option<Vec<f64>> {
        let mut levels = vec![0.0];
        levels.extend(self.values.iter().rev());
        Some(levels)
    }

    fn max_distance(&self) -> f64 {
        self.values[0]
    }
}

impl PackingBound for SequenceSet {
    /// The first `#{sigma_j > eps}` points plus one more are pairwise more
    /// than `eps` apart.
    fn packing_log2_lower(&self, eps: f64) -> f64 {
        ((self.first_within(eps) + 1) as f64).log2()
    }

    fn diameter_upper(&self) -> f64 {
        self.values[0]
    }
}

/// The untruncated set `{sigma_j e_j} ∪ {0}`, known only through closed
/// forms.
#[derive(Debug, Clone, PartialEq)]
pub struct InfiniteSequenceSet {
    pub sigma: Sigma,
}

impl PackingBound for InfiniteSequenceSet {
    fn packing_log2_lower(&self, eps: f64) -> f64 {
        if !(eps > 0.0) {
            return f64::INFINITY;
        }
        if self.sigma.term(1) <= eps {
            return 0.0;
        }
        // Safety margin for the rounding in the closed forms below.
        const SLACK: f64 = 1e-9;
        match &self.sigma {
            // sigma_j > eps iff j + 1 < 2^(1/eps), so at least 2^(1/eps) - 2
            // terms, and the packing has at least 2^(1/eps) - 1 points.
            Sigma::LogInv => {
                let x = 1.0 / eps;
                (x + (-(-x).exp2()).ln_1p() / std::f64::consts::LN_2 - SLACK).max(0.0)
            }
            // j^(-c) > eps iff j < eps^(-1/c): at least eps^(-1/c) - 1 terms.
            Sigma::Power { c } => (-eps.log2() / c - SLACK).max(0.0),
            Sigma::Custom { values } => ((values.partition_point(|v| *v > eps) + 1) as f64).log2(),
        }
    }

    fn diameter_upper(&self) -> f64 {
        self.sigma.term(1)
    }
}

/// How the left side of the volume condition was bounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SumMethod {
    Exact,
    DyadicBlocks,
    IntegralTail,
}

/// Split of the dyadic block bound into its three ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSplit {
    pub j_blocks: u32,
    /// `1 + sum_{k <= n/ln 4} 2^k k^(-n)`.
    pub s1: f64,
    /// `sum_{n/ln 4 < k <= n/ln 2}`.
    pub s2: f64,
    /// `sum_{n/ln 2 < k <= J-1}`.
    pub s3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefrCondition {
    pub holds: bool,
    /// Upper bound on `sum_{j <= N} sigma_j^n`.
    pub lhs_upper: f64,
    /// `(gamma / 2)^n`.
    pub rhs: f64,
    pub method: SumMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split: Option<BlockSplit>,
}

/// `N` as an exact integer or through its base-2 logarithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Count {
    Exact(u64),
    Log2(f64),
}

impl Count {
    pub fn log2(&self) -> f64 {
        match self {
            Count::Exact(k) => (*k as f64).log2(),
            Count::Log2(l) => *l,
        }
    }

    /// `(n + 1)^n`, exact when it fits in 64 bits.
    pub fn power_count(n: u32) -> Count {
        match (n as u64 + 1).checked_pow(n) {
            Some(k) => Count::Exact(k),
            None => Count::Log2(n as f64 * (n as f64 + 1.0).log2()),
        }
    }

    pub fn small(&self) -> Option<usize> {
        match self {
            Count::Exact(k) if *k <= EXACT_SUM_MAX as u64 => Some(*k as usize),
            _ => None,
        }
    }

    /// `sigma_N`.
    pub fn sigma_at(&self, sigma: &Sigma) -> Option<f64> {
        match self {
            Count::Exact(k)
                if *k <= usize::MAX as u64
                    && sigma.available().is_none_or(|a| (*k as usize) <= a) =>
            {
                Some(sigma.term(*k as usize))
            }
            _ => sigma.term_from_log2(self.log2()),
        }
    }
}

/// Check `sum_{j <= N} sigma_j^n <= (gamma / 2)^n` with a certified upper
/// bound on the left side.
pub fn refr_condition(sigma: &Sigma, gamma: f64, n: u32, count: Count) -> Result<RefrCondition> {
    sigma.validate()?;
    if !(gamma > 0.0) || n == 0 {
        return Err(Error::Precondition("gamma and n must be positive".into()));
    }
    if sigma.term(1) > gamma / 2.0 {
        return Err(Error::Precondition(format!(
            "sigma_1 = {} exceeds gamma / 2 = {}",
            sigma.term(1),
            gamma / 2.0
        )));
    }
    let rhs = (gamma / 2.0).powi(n as i32);
    if let Some(big_n) = count.small() {
        if let Some(a) = sigma.available() {
            if big_n > a {
                return Err(Error::InvalidSequence(format!(
                    "N = {big_n} exceeds {a} listed terms"
                )));
            }
        }
        let sum: f64 = (1..=big_n).map(|j| sigma.term(j).powi(n as i32)).sum();
        // Rounding in the terms and the running sum.
        let lhs_upper = sum * (1.0 + 4.0 * f64::EPSILON * (big_n as f64 + n as f64));
        return Ok(RefrCondition {
            holds: lhs_upper <= rhs,
            lhs_upper,
            rhs,
            method: SumMethod::Exact,
            split: None,
        });
    }
    match sigma {
        Sigma::LogInv => {
            let (lhs_upper, split) = block_bound(n, count.log2());
            Ok(RefrCondition {
                holds: lhs_upper <= rhs,
                lhs_upper,
                rhs,
                method: SumMethod::DyadicBlocks,
                split: Some(split),
            })
        }
        Sigma::Power { c } => {
            let lhs_upper = integral_tail_bound(*c, n).ok_or_else(|| {
                Error::Precondition(format!(
                    "integral tail bound needs c n > 1 (c = {c}, n = {n})"
                ))
            })?;
            Ok(RefrCondition {
                holds: lhs_upper <= rhs,
                lhs_upper,
                rhs,
                method: SumMethod::IntegralTail,
                split: None,
            })
        }
        Sigma::Custom { .. } => Err(Error::Unsupported(
            "no block majorant for a custom sequence with N above the summation limit".into(),
        )),
    }
}

/// `1 + sum_{k=1}^{J-1} 2^k k^(-n)` with `2^(J-1) <= N < 2^J`, and its
/// three-range split.
pub fn block_bound(n: u32, log2_count: f64) -> (f64, BlockSplit) {
    let j_blocks = log2_count.floor() as u32 + 1;
    let nf = n as f64;
    let (mut s1, mut s2, mut s3) = (1.0, 0.0, 0.0);
    for k in 1..j_blocks {
        let kf = k as f64;
        let q = (kf - nf * kf.log2()).exp2();
        if kf <= nf / 4f64.ln() {
            s1 += q;
        } else if kf <= nf / 2f64.ln() {
            s2 += q;
        } else {
            s3 += q;
        }
    }
    let total = (s1 + s2 + s3) * (1.0 + 1e-12);
    (
        total,
        BlockSplit {
            j_blocks,
            s1,
            s2,
            s3,
        },
    )
}

/// `n0 = floor(1 / c)`, the last `n` with `n c <= 1`.
pub fn power_n0(c: f64) -> u32 {
    (1.0 / c).floor() as u32
}

/// `m0 + m0 / (c n - 1)` with `m0 = max(n0, 1)`, bounding `sum_j j^(-c n)`
/// over all `j`. `None` unless `c n > 1`.
pub fn integral_tail_bound(c: f64, n: u32) -> Option<f64> {
    let cn = c * n as f64;
    if cn <= 1.0 {
        return None;
    }
    let m0 = power_n0(c).max(1) as f64;
    Some((m0 + m0 / (cn - 1.0)) * (1.0 + 1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_set(m: usize) -> SequenceSet {
        sequence_set(&SequenceSetSpec {
            sigma: Sigma::LogInv,
            truncation: m,
        })
        .unwrap()
    }

    #[test]
    fn closed_form_distances() {
        let s = log_set(10);
        // ||sigma_j e_j - sigma_j' e_j'|| = sigma_j for j' > j.
        assert_eq!(s.distance(2, 7), s.sigma(3));
        assert_eq!(s.distance(7, 2), s.sigma(3));
        assert_eq!(s.distance(4, s.origin()), s.sigma(5));
        assert_eq!(s.max_distance(), 1.0);
    }

    #[test]
    fn oracle_agrees_with_dense_copy() {
        let s = log_set(12);
        let d = s.to_dense();
        for i in 0..s.len() {
            for j in 0..s.len() {
                assert_eq!(s.distance(i, j), d.distance(i, j));
            }
            for eps in [0.0, 0.3, s.sigma(5), 0.5, 1.0] {
                assert_eq!(s.neighbors_within(i, eps), d.neighbors_within(i, eps));
                assert_eq!(s.count_within(i, eps), d.count_within(i, eps));
            }
        }
    }

    #[test]
    fn rejects_bad_sequences() {
        let bad = SequenceSetSpec {
            sigma: Sigma::Custom {
                values: vec![1.0, 0.5, 0.5],
            },
            truncation: 3,
        };
        assert!(sequence_set(&bad).is_err());
        let short = SequenceSetSpec {
            sigma: Sigma::Custom {
                values: vec![1.0, 0.5],
            },
            truncation: 3,
        };
        assert!(sequence_set(&short).is_err());
        assert!(Sigma::Power { c: -1.0 }.validate().is_err());
    }

    #[test]
    fn count_above_matches_scan() {
        for sigma in [Sigma::LogInv, Sigma::Power { c: 0.7 }] {
            for eps in [0.9, 0.5, 0.21, 0.1] {
                let scan = (1..=5000).filter(|&j| sigma.term(j) > eps).count();
                assert_eq!(sigma.count_above(eps, 5000), scan);
            }
        }
    }

    #[test]
    fn infinite_packing_matches_truncation() {
        // The truncation's packing count is a lower bound for the full set,
        // and the closed form must not exceed the true count.
        let inf = InfiniteSequenceSet {
            sigma: Sigma::LogInv,
        };
        let s = log_set(1 << 12);
        for eps in [0.5, 0.2, 0.15, 0.11] {
            let exact = ((Sigma::LogInv.count_above(eps, 1 << 12) + 1) as f64).log2();
            let closed = inf.packing_log2_lower(eps);
            assert!(closed <= exact + 1e-9, "{eps}: {closed} vs {exact}");
            assert!(closed >= exact - 1.0);
            assert_eq!(s.packing_log2_lower(eps), exact);
        }
    }

    #[test]
    fn refr_exact_small_case() {
        // sigma_j = 2^-j, gamma = 2, n = 1, N = 3: 1/2 + 1/4 + 1/8 <= 1.
        let sigma = Sigma::Custom {
            values: vec![0.5, 0.25, 0.125],
        };
        let r = refr_condition(&sigma, 2.0, 1, Count::Exact(3)).unwrap();
        assert!(r.holds);
        assert!((r.lhs_upper - 0.875).abs() < 1e-12);
        assert_eq!(r.rhs, 1.0);
    }

    #[test]
    fn refr_gate_and_unsupported() {
        let sigma = Sigma::Custom {
            values: vec![3.0, 1.0],
        };
        assert!(matches!(
            refr_condition(&sigma, 3.0, 2, Count::Exact(2)),
            Err(Error::Precondition(_))
        ));
        let sigma = Sigma::Custom {
            values: vec![1.0, 0.5],
        };
        assert!(matches!(
            refr_condition(&sigma, 3.0, 2, Count::Exact(10_000_000)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn block_bound_dominates_exact_sum() {
        for n in 5..=7u32 {
            let big_n = (n as usize + 1).pow(n);
            let exact: f64 = (1..=big_n)
                .map(|j| Sigma::LogInv.term(j).powi(n as i32))
                .sum();
            let (bound, split) = block_bound(n, (big_n as f64).log2());
            assert!(exact <= bound);
            assert!(bound < 6.0 + 2.0 * std::f64::consts::E);
            assert!(split.s1 < 5.0 && split.s2 < 1.0);
        }
    }

    #[test]
    fn log_inv_condition_for_large_n() {
        for n in [8u32, 10, 12] {
            let r = refr_condition(&Sigma::LogInv, 3.0, n, Count::power_count(n)).unwrap();
            assert_eq!(r.method, SumMethod::DyadicBlocks);
            assert!(r.holds);
            assert!(r.lhs_upper < 6.0 + 2.0 * std::f64::consts::E);
        }
    }

    #[test]
    fn sigma_from_log2() {
        let s = Sigma::LogInv;
        let direct = s.term(117_649);
        let via = s.term_from_log2((117_649f64).log2()).unwrap();
        assert!((direct - via).abs() < 1e-15);
    }
}
