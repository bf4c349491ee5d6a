//! Constructive Lipschitz maps from a finite-dimensional unit ball into the
//! target space: constants, bump sums, paths, affine balls, ReLU networks.

mod build;
mod bump;
mod dyadic;

pub use build::{
    build_entropy_map, build_path_map, build_refr_map, entropy_grid_center, refr_levels, RefrMap,
    DEFAULT_MATERIALIZE, ENTROPY_GRID_GUARD,
};
pub use bump::{BumpSum, Directions};
pub use dyadic::{allocate_dyadic_cubes, CubeAllocation, PAIRWISE_AUDIT_MAX};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{Norm, NormedSpace};
use crate::relu::{self, ReLUNetConfig};
use bump::{BumpIndex, Output};

/// Slack on the domain-ball membership test.
pub const DOMAIN_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantMap {
    pub domain: NormedSpace,
    pub target: NormedSpace,
    pub g: Vec<f64>,
}

/// Continuous piecewise linear `[-1, 1] -> X` through `(t_j, f_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathMap {
    pub target: NormedSpace,
    pub knots: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

/// `y -> g0 + gamma * sum_i y_i b_i` on the unit ball of the pulled-back
/// norm `||y|| = ||sum_i y_i b_i||_X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineBall {
    pub target: NormedSpace,
    pub g0: Vec<f64>,
    pub gamma: f64,
    pub basis: Vec<Vec<f64>>,
}

impl AffineBall {
    pub fn combine(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.target.dim];
        for (c, b) in y.iter().zip(&self.basis) {
            for (o, v) in out.iter_mut().zip(b) {
                *o += c * v;
            }
        }
        out
    }
}

/// Parameter-to-function map of a ReLU network, functions sampled on a
/// tensor grid of `[0, 1]^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReluNetMap {
    pub config: ReLUNetConfig,
    pub grid_per_axis: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum LipschitzMapSpec {
    Constant(ConstantMap),
    BumpSum(BumpSum),
    PiecewiseLinearPath(PathMap),
    AffineBall(AffineBall),
    ReluNet(ReluNetMap),
}

impl LipschitzMapSpec {
    pub fn domain_dim(&self) -> usize {
        match self {
            Self::Constant(c) => c.domain.dim,
            Self::BumpSum(b) => b.domain.dim,
            Self::PiecewiseLinearPath(_) => 1,
            Self::AffineBall(a) => a.basis.len(),
            Self::ReluNet(r) => r.config.param_count(),
        }
    }

    pub fn target(&self) -> NormedSpace {
        match self {
            Self::Constant(c) => c.target.clone(),
            Self::BumpSum(b) => b.target.clone(),
            Self::PiecewiseLinearPath(p) => p.target.clone(),
            Self::AffineBall(a) => a.target.clone(),
            Self::ReluNet(r) => NormedSpace::linf(r.grid_per_axis.pow(r.config.d as u32)),
        }
    }

    /// Norm of a domain point.
    pub fn domain_norm(&self, y: &[f64]) -> Result<f64> {
        if y.len() != self.domain_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.domain_dim(),
                got: y.len(),
            });
        }
        Ok(match self {
            Self::Constant(c) => c.domain.norm(y)?,
            Self::BumpSum(b) => b.domain.norm(y)?,
            Self::PiecewiseLinearPath(_) | Self::ReluNet(_) => {
                y.iter().fold(0.0, |m, v| m.max(v.abs()))
            }
            Self::AffineBall(a) => a.target.norm(&a.combine(y))?,
        })
    }

    fn domain_distance(&self, y: &[f64], z: &[f64]) -> f64 {
        let diff: Vec<f64> = y.iter().zip(z).map(|(a, b)| a - b).collect();
        self.domain_norm(&diff).expect("conforming points")
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Constant(c) => {
                c.domain.validate()?;
                c.target.validate()?;
                c.target.check_point(&c.g)
            }
            Self::BumpSum(b) => b.validate(),
            Self::PiecewiseLinearPath(p) => {
                p.target.validate()?;
                if p.knots.len() < 2 || p.knots.len() != p.values.len() {
                    return Err(Error::InvalidMap(
                        "a path needs matching knots and values (at least 2)".into(),
                    ));
                }
                if p.knots.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::InvalidMap(
                        "knots must be strictly increasing".into(),
                    ));
                }
                if p.knots[0] < -1.0 || *p.knots.last().unwrap() > 1.0 {
                    return Err(Error::InvalidMap("knots must lie in [-1, 1]".into()));
                }
                p.values.iter().try_for_each(|v| p.target.check_point(v))
            }
            Self::AffineBall(a) => {
                a.target.validate()?;
                a.target.check_point(&a.g0)?;
                if a.basis.is_empty() {
                    return Err(Error::InvalidMap("empty basis".into()));
                }
                if !(a.gamma >= 0.0) {
                    return Err(Error::InvalidMap("gamma must be nonnegative".into()));
                }
                a.basis.iter().try_for_each(|b| a.target.check_point(b))
            }
            Self::ReluNet(r) => {
                r.config.validate()?;
                if r.grid_per_axis < 2 {
                    return Err(Error::InvalidMap(
                        "grid needs at least 2 points per axis".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// `Phi(y)`, for `y` in the domain unit ball.
    pub fn evaluate(&self, y: &[f64]) -> Result<Vec<f64>> {
        let norm = self.domain_norm(y)?;
        if norm > 1.0 + DOMAIN_SLACK {
            return Err(Error::OutsideDomain { norm });
        }
        Ok(self.output(y, None).into_dense(self.target().dim))
    }

    /// `Phi` at many domain points, in order.
    pub fn evaluate_many(&self, ys: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        for y in ys {
            let norm = self.domain_norm(y)?;
            if norm > 1.0 + DOMAIN_SLACK {
                return Err(Error::OutsideDomain { norm });
            }
        }
        let index = match self {
            Self::BumpSum(b) if b.len() > 16 => BumpIndex::build(b),
            _ => None,
        };
        let dim = self.target().dim;
        Ok(ys
            .par_iter()
            .map(|y| self.output(y, index.as_ref()).into_dense(dim))
            .collect())
    }

    fn output(&self, y: &[f64], index: Option<&BumpIndex>) -> Output {
        match self {
            Self::Constant(c) => Output::Dense(c.g.clone()),
            Self::BumpSum(b) => b.output(y, index),
            Self::PiecewiseLinearPath(p) => Output::Dense(path_value(p, y[0])),
            Self::AffineBall(a) => {
                let mut v = a.combine(y);
                for (o, g) in v.iter_mut().zip(&a.g0) {
                    *o = g + a.gamma * *o;
                }
                Output::Dense(v)
            }
            Self::ReluNet(r) => {
                let grid = relu::tensor_grid(r.config.d, r.grid_per_axis);
                Output::Dense(relu::evaluate_on_grid(&r.config, y, &grid))
            }
        }
    }

    /// Closed-form Lipschitz constant of the construction.
    pub fn declared_lipschitz(&self) -> f64 {
        match self {
            Self::Constant(_) => 0.0,
            Self::BumpSum(b) => b.declared_lipschitz(),
            Self::PiecewiseLinearPath(p) => p
                .knots
                .windows(2)
                .zip(p.values.windows(2))
                .map(|(t, f)| p.target.distance_unchecked(&f[1], &f[0]) / (t[1] - t[0]))
                .fold(0.0, f64::max),
            Self::AffineBall(a) => a.gamma,
            Self::ReluNet(r) => relu::lip_bound(&r.config).c_n,
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let dim = self.domain_dim();
        let cube: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let sup_domain = match self {
            Self::Constant(c) => c.domain.norm == Norm::LInf,
            Self::BumpSum(b) => b.domain.norm == Norm::LInf,
            _ => true,
        } && !matches!(self, Self::AffineBall(_));
        if sup_domain {
            return cube;
        }
        // Radial draw: uniform direction in the cube, radius t^(1/dim).
        let norm = self.domain_norm(&cube).expect("conforming point");
        if norm == 0.0 {
            return cube;
        }
        let t: f64 = rng.gen::<f64>().powf(1.0 / dim as f64);
        cube.iter().map(|c| c * t / norm).collect()
    }
}

fn path_value(p: &PathMap, t: f64) -> Vec<f64> {
    let k = p.knots.len();
    let i = p.knots.partition_point(|x| *x <= t).clamp(1, k - 1) - 1;
    let (t0, t1) = (p.knots[i], p.knots[i + 1]);
    let s = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
    p.values[i]
        .iter()
        .zip(&p.values[i + 1])
        .map(|(a, b)| a + s * (b - a))
        .collect()
}

/// Pairs per independently seeded chunk.
const CHUNK: usize = 256;

/// Largest ratio `||Phi(y) - Phi(y')|| / ||y - y'||` over `pairs` pairs of
/// independent draws from the domain ball. Fails with a numeric error if it
/// exceeds the declared constant.
pub fn empirical_lipschitz(map: &LipschitzMapSpec, seed: u64, pairs: usize) -> Result<f64> {
    if pairs == 0 {
        return Err(Error::Precondition("pairs must be positive".into()));
    }
    map.validate()?;
    let index = match map {
        LipschitzMapSpec::BumpSum(b) if b.len() > 16 => BumpIndex::build(b),
        _ => None,
    };
    let target = map.target();
    let chunks = pairs.div_ceil(CHUNK);
    let best = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64 + 1);
            let count = CHUNK.min(pairs - c * CHUNK);
            let mut best = 0.0f64;
            for _ in 0..count {
                let y = map.sample(&mut rng);
                let z = map.sample(&mut rng);
                let dy = map.domain_distance(&y, &z);
                if dy == 0.0 {
                    continue;
                }
                let a = map.output(&y, index.as_ref());
                let b = map.output(&z, index.as_ref());
                best = best.max(a.distance(&b, &target) / dy);
            }
            best
        })
        .reduce(|| 0.0, f64::max);
    check_against_declared(map, best)
}

/// Ratio over caller-chosen pairs, with the same declared-constant check.
pub fn lipschitz_ratio_on_pairs(
    map: &LipschitzMapSpec,
    pairs: &[(Vec<f64>, Vec<f64>)],
) -> Result<f64> {
    let target = map.target();
    let mut best = 0.0f64;
    for (y, z) in pairs {
        for p in [y, z] {
            let norm = map.domain_norm(p)?;
            if norm > 1.0 + DOMAIN_SLACK {
                return Err(Error::OutsideDomain { norm });
            }
        }
        let dy = map.domain_distance(y, z);
        if dy == 0.0 {
            continue;
        }
        best = best.max(map.output(y, None).distance(&map.output(z, None), &target) / dy);
    }
    check_against_declared(map, best)
}

fn check_against_declared(map: &LipschitzMapSpec, ratio: f64) -> Result<f64> {
    let declared = map.declared_lipschitz();
    if ratio > declared * (1.0 + 1e-9) + 1e-12 {
        return Err(Error::Numeric(format!(
            "observed ratio {ratio} exceeds declared constant {declared}"
        )));
    }
    Ok(ratio)
}
