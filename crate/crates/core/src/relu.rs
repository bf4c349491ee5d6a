//! Constant-width ReLU networks as maps from bounded parameter vectors to
//! functions on `[0, 1]^d`, with the layer-by-layer Lipschitz recursion.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Network shape. Parameters are ordered layer by layer; within a layer the
/// weight matrix comes first (row-major), then the bias vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReLUNetConfig {
    /// Input dimension.
    pub d: usize,
    /// Width.
    #[serde(rename = "W")]
    pub width: usize,
    /// Number of hidden layers.
    #[serde(rename = "n")]
    pub depth: usize,
}

impl ReLUNetConfig {
    pub fn new(d: usize, width: usize, depth: usize) -> Result<Self> {
        let c = Self { d, width, depth };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.depth == 0 {
            return Err(Error::Config("d and n must be at least 1".into()));
        }
        if self.width < 2 {
            return Err(Error::Config("width must be at least 2".into()));
        }
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        param_count(self.d, self.width, self.depth)
    }

    /// `(rows, cols)` of each affine layer, input layer first.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut shapes = vec![(self.width, self.d)];
        shapes.extend(std::iter::repeat_n(
            (self.width, self.width),
            self.depth - 1,
        ));
        shapes.push((1, self.width));
        shapes
    }

    /// Offset of each layer's first parameter.
    pub fn layer_offsets(&self) -> Vec<usize> {
        let mut off = 0;
        self.layer_shapes()
            .into_iter()
            .map(|(r, c)| {
                let o = off;
                off += r * (c + 1);
                o
            })
            .collect()
    }
}

/// `W(d+1) + (n-1)W(W+1) + (W+1)`.
pub fn param_count(d: usize, width: usize, depth: usize) -> usize {
    width * (d + 1) + depth.saturating_sub(1) * width * (width + 1) + (width + 1)
}

/// `(d+2) W^j`, the bound on layer `j`'s outputs for parameters in the unit
/// ball.
pub fn layer_bound(config: &ReLUNetConfig, j: usize) -> f64 {
    (config.d as f64 + 2.0) * (config.width as f64).powi(j as i32)
}

/// Evaluate the network at `x`, checking the parameter norm and every layer
/// bound.
pub fn forward(config: &ReLUNetConfig, y: &[f64], x: &[f64]) -> Result<f64> {
    check_params(config, y)?;
    if x.len() != config.d {
        return Err(Error::DimensionMismatch {
            expected: config.d,
            got: x.len(),
        });
    }
    if x.iter().any(|c| !(0.0..=1.0).contains(c)) {
        return Err(Error::Precondition("x must lie in [0, 1]^d".into()));
    }
    forward_unchecked(config, y, x, true)
}

fn check_params(config: &ReLUNetConfig, y: &[f64]) -> Result<()> {
    let expected = config.param_count();
    if y.len() != expected {
        return Err(Error::ParamCount {
            expected,
            got: y.len(),
        });
    }
    let norm = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(norm <= 1.0 + 1e-12) {
        return Err(Error::OutsideDomain { norm });
    }
    Ok(())
}

fn forward_unchecked(config: &ReLUNetConfig, y: &[f64], x: &[f64], audit: bool) -> Result<f64> {
    let mut act: Vec<f64> = x.to_vec();
    let mut off = 0;
    let shapes = config.layer_shapes();
    let last = shapes.len() - 1;
    for (layer, (rows, cols)) in shapes.into_iter().enumerate() {
        let (mat, rest) = y[off..].split_at(rows * cols);
        let bias = &rest[..rows];
        off += rows * (cols + 1);
        let mut next: Vec<f64> = mat
            .chunks_exact(cols)
            .zip(bias)
            .map(|(row, b)| row.iter().zip(&act).map(|(a, v)| a * v).sum::<f64>() + b)
            .collect();
        if layer < last {
            next.iter_mut().for_each(|v| *v = v.max(0.0));
        }
        if audit {
            let bound = layer_bound(config, layer);
            let value = next.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if value > bound * (1.0 + 1e-12) {
                return Err(Error::LayerBound {
                    layer,
                    value,
                    bound,
                });
            }
        }
        act = next;
    }
    Ok(act[0])
}

/// Recursion constants and the coarse bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipBoundTrace {
    /// `b_j = (d+2) W^j`, `j = 0..=n`.
    pub layer_bounds: Vec<f64>,
    /// `C_j`, `j = 0..=n`, as decimal strings (exact).
    pub constants: Vec<String>,
    /// `C_n` rounded to the nearest double.
    pub c_n: f64,
    /// `C'(d)`.
    pub c_prime: u64,
    /// `C'(d) n W^n`, exact decimal.
    pub coarse: String,
    pub coarse_f64: f64,
    /// Whether `C_n < C' n W^n` holds in exact arithmetic.
    pub strict: bool,
}

/// `C'(d) = 2d + 5`. `C_n / (n W^n)` is largest at `n = 1, W = 2`, where it
/// equals `2d + 3.5`.
pub fn c_prime(d: usize) -> u64 {
    2 * d as u64 + 5
}

/// Exact `C_j = W C_{j-1} + (d+2) W^j + 1`, `C_0 = d + 1`.
pub fn recursion(config: &ReLUNetConfig) -> Vec<BigUint> {
    let w = BigUint::from(config.width);
    let d2 = BigUint::from(config.d + 2);
    let mut c = vec![BigUint::from(config.d + 1)];
    let mut wj = BigUint::one();
    for _ in 1..=config.depth {
        wj *= &w;
        let next = &w * c.last().unwrap() + &d2 * &wj + BigUint::one();
        c.push(next);
    }
    c
}

/// Unrolled form `(d+1+n(d+2)) W^n + (W^n - 1)/(W - 1)`.
pub fn closed_form(config: &ReLUNetConfig) -> BigUint {
    let w = BigUint::from(config.width);
    let wn = num_traits::pow(w.clone(), config.depth);
    let lead = BigUint::from(config.d + 1 + config.depth * (config.d + 2));
    let geo = (&wn - BigUint::one()) / (w - BigUint::one());
    lead * &wn + geo
}

pub fn lip_bound(config: &ReLUNetConfig) -> LipBoundTrace {
    let cs = recursion(config);
    let c_n = cs.last().unwrap().clone();
    let wn = num_traits::pow(BigUint::from(config.width), config.depth);
    let coarse = BigUint::from(c_prime(config.d)) * BigUint::from(config.depth) * wn;
    LipBoundTrace {
        layer_bounds: (0..=config.depth).map(|j| layer_bound(config, j)).collect(),
        constants: cs.iter().map(|c| c.to_string()).collect(),
        c_n: big_to_f64(&c_n),
        c_prime: c_prime(config.d),
        coarse: coarse.to_string(),
        coarse_f64: big_to_f64(&coarse),
        strict: c_n < coarse,
    }
}

fn big_to_f64(x: &BigUint) -> f64 {
    if x.is_zero() {
        0.0
    } else {
        x.to_f64().unwrap_or(f64::INFINITY)
    }
}

/// Tensor grid on `[0, 1]^d` with `g` points per axis (`g >= 2`).
pub fn tensor_grid(d: usize, g: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..g).map(|i| i as f64 / (g - 1) as f64).collect();
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&a| {
                    let mut q = p.clone();
                    q.push(a);
                    q
                })
            })
            .collect();
    }
    out
}

/// Largest per-axis grid size with `g^d <= 256` (and `g >= 2`).
pub fn default_grid_per_axis(d: usize) -> usize {
    let mut g = 2usize;
    while (g + 1).checked_pow(d as u32).is_some_and(|v| v <= 256) {
        g += 1;
    }
    g
}

/// Values of `Phi(y)` on a grid, without the layer audit.
pub fn evaluate_on_grid(config: &ReLUNetConfig, y: &[f64], grid: &[Vec<f64>]) -> Vec<f64> {
    grid.iter()
        .map(|x| forward_unchecked(config, y, x, false).expect("shape checked"))
        .collect()
}

/// Which parameters the sampler perturbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Independent uniform pairs and local perturbations, half each.
    Full,
    /// Pairs that differ only in the output layer.
    LastLayer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzCheck {
    pub max_ratio: f64,
    pub bound: f64,
    pub coarse_bound: f64,
    pub pass: bool,
    pub trials: usize,
    pub grid_points: usize,
}

/// Pairs per independently seeded chunk.
const CHUNK: usize = 64;

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64 + 1);
    rng
}

/// Sample parameter pairs in the unit ball and compare the worst observed
/// `sup_x |Phi(y)(x) - Phi(y')(x)| / ||y - y'||_inf` against `C_n`.
pub fn verify_lipschitz(
    config: &ReLUNetConfig,
    seed: u64,
    trials: usize,
    grid_per_axis: usize,
    sampling: Sampling,
) -> Result<LipschitzCheck> {
    config.validate()?;
    if trials == 0 {
        return Err(Error::Precondition("trials must be positive".into()));
    }
    if grid_per_axis < 2 {
        return Err(Error::Precondition(
            "grid needs at least 2 points per axis".into(),
        ));
    }
    let grid = tensor_grid(config.d, grid_per_axis);
    let p = config.param_count();
    let last = *config.layer_offsets().last().unwrap();
    let chunks = trials.div_ceil(CHUNK);
    let max_ratio = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let count = CHUNK.min(trials - c * CHUNK);
            let mut best = 0.0f64;
            for t in 0..count {
                let y: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let mut y2 = y.clone();
                let local = (c * CHUNK + t) % 2 == 1;
                let range = match sampling {
                    Sampling::Full => 0..p,
                    Sampling::LastLayer => last..p,
                };
                for i in range {
                    y2[i] = if local {
                        (y[i] + rng.gen_range(-1e-3..=1e-3)).clamp(-1.0, 1.0)
                    } else {
                        rng.gen_range(-1.0..=1.0)
                    };
                }
                let dy = y
                    .iter()
                    .zip(&y2)
                    .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                if dy == 0.0 {
                    continue;
                }
                let a = evaluate_on_grid(config, &y, &grid);
                let b = evaluate_on_grid(config, &y2, &grid);
                let sup = a
                    .iter()
                    .zip(&b)
                    .fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
                best = best.max(sup / dy);
            }
            best
        })
        .reduce(|| 0.0, f64::max);
    let trace = lip_bound(config);
    let bound = match sampling {
        Sampling::Full => trace.c_n,
        Sampling::LastLayer => last_layer_bound(config),
    };
    Ok(LipschitzCheck {
        max_ratio,
        bound,
        coarse_bound: trace.coarse_f64,
        pass: max_ratio <= trace.c_n,
        trials,
        grid_points: grid.len(),
    })
}

/// Bound for pairs differing only in the output layer:
/// `W (d+2) W^{n-1} + 1`.
pub fn last_layer_bound(config: &ReLUNetConfig) -> f64 {
    config.width as f64 * layer_bound(config, config.depth - 1) + 1.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_counts() {
        assert_eq!(param_count(1, 2, 1), 7);
        assert_eq!(param_count(2, 2, 2), 15);
        for (d, w, n) in [(1, 2, 1), (3, 4, 5), (2, 3, 7)] {
            assert_eq!(param_count(d, w, n + 1) - param_count(d, w, n), w * (w + 1));
        }
        let c = ReLUNetConfig::new(2, 3, 4).unwrap();
        let shapes = c.layer_shapes();
        let total: usize = shapes.iter().map(|(r, k)| r * (k + 1)).sum();
        assert_eq!(total, c.param_count());
        assert_eq!(c.layer_offsets()[1], 3 * 3);
    }

    #[test]
    fn zero_parameters_give_zero() {
        let c = ReLUNetConfig::new(2, 3, 2).unwrap();
        let y = vec![0.0; c.param_count()];
        for x in tensor_grid(2, 5) {
            assert_eq!(forward(&c, &y, &x).unwrap(), 0.0);
        }
    }

    #[test]
    fn absolute_value_network() {
        let c = ReLUNetConfig::new(1, 2, 1).unwrap();
        // A0 = (1; -1), b0 = 0, A1 = (1, 1), b1 = 0.
        let y = [1.0, -1.0, 0.0, 0.0, 1.0, 1.0, 0.0];
        for x in [0.0, 0.25, 0.7, 1.0] {
            assert_eq!(forward(&c, &y, &[x]).unwrap(), x);
        }
    }

    #[test]
    fn forward_rejects_bad_inputs() {
        let c = ReLUNetConfig::new(1, 2, 1).unwrap();
        assert!(matches!(
            forward(&c, &[0.0; 6], &[0.5]),
            Err(Error::ParamCount { .. })
        ));
        assert!(matches!(
            forward(&c, &[2.0; 7], &[0.5]),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn recursion_values() {
        let c = ReLUNetConfig::new(1, 2, 1).unwrap();
        let r = recursion(&c);
        assert_eq!(r[0], BigUint::from(2u32));
        assert_eq!(r[1], BigUint::from(11u32));
        // Hand unrolling for W=2, d=1, n=3: C1 = 11, C2 = 22+12+1 = 35,
        // C3 = 70+24+1 = 95.
        let c3 = ReLUNetConfig::new(1, 2, 3).unwrap();
        assert_eq!(recursion(&c3)[3], BigUint::from(95u32));
        assert_eq!(closed_form(&c3), BigUint::from(95u32));
    }

    #[test]
    fn closed_form_matches_recursion() {
        for d in 1..4 {
            for w in 2..6 {
                for n in 1..40 {
                    let c = ReLUNetConfig::new(d, w, n).unwrap();
                    assert_eq!(recursion(&c).pop().unwrap(), closed_form(&c));
                    assert!(lip_bound(&c).strict);
                }
            }
        }
    }

    #[test]
    fn huge_depth_stays_exact() {
        let c = ReLUNetConfig::new(3, 7, 400).unwrap();
        let t = lip_bound(&c);
        assert!(t.strict);
        assert!(t.c_n.is_infinite());
        assert_eq!(t.constants.last().unwrap(), &closed_form(&c).to_string());
    }

    #[test]
    fn grid_sizes() {
        assert_eq!(default_grid_per_axis(1), 256);
        assert_eq!(default_grid_per_axis(2), 16);
        assert_eq!(default_grid_per_axis(3), 6);
        assert_eq!(tensor_grid(2, 3).len(), 9);
    }

    #[test]
    fn verify_small_network() {
        let c = ReLUNetConfig::new(1, 2, 3).unwrap();
        let r = verify_lipschitz(&c, 3, 200, 64, Sampling::Full).unwrap();
        assert!(r.pass);
        assert!(r.max_ratio > 0.0);
        let r = verify_lipschitz(&c, 3, 200, 64, Sampling::LastLayer).unwrap();
        assert!(r.max_ratio <= last_layer_bound(&c));
        assert!(last_layer_bound(&c) < lip_bound(&c).c_n);
    }

    #[test]
    fn verify_is_deterministic() {
        let c = ReLUNetConfig::new(2, 2, 2).unwrap();
        let a = verify_lipschitz(&c, 9, 130, 4, Sampling::Full).unwrap();
        let b = verify_lipschitz(&c, 9, 130, 4, Sampling::Full).unwrap();
        assert_eq!(a, b);
    }
}
