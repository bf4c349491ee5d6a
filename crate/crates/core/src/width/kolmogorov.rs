use serde::{Deserialize, Serialize};

use super::lipschitz::fixed_width_upper;
use super::{Quantity, WidthCertificate, Witness};
use crate::error::{Error, Result};
use crate::maps::{AffineBall, LipschitzMapSpec};
use crate::metric::{radius_upper, Direction, FiniteSet, Norm};

/// Tolerance on breakpoint matching and indicator detection.
const STEP_TOL: f64 = 1e-9;

/// Candidate approximation space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Subspace {
    /// Span of the given vectors, projected orthogonally (l2 only).
    Span { basis: Vec<Vec<f64>> },
    /// Indicators of `[2j/n, 2(j+1)/n]`, `j < n`, for step functions that
    /// are indicators of unit intervals `[a, a + 1]`.
    TransportCells { n: usize },
}

impl Subspace {
    pub fn dim(&self) -> usize {
        match self {
            Subspace::Span { basis } => basis.len(),
            Subspace::TransportCells { n } => *n,
        }
    }
}

/// Basis of the subspace in target coordinates, and per point the
/// coefficients and the approximant.
pub(crate) struct Projection {
    pub basis: Vec<Vec<f64>>,
    pub coeffs: Vec<Vec<f64>>,
    pub approximants: Vec<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Modified Gram-Schmidt with one reorthogonalisation pass; numerically
/// dependent vectors are dropped.
fn orthonormalize(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut q: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let scale = dot(v, v).sqrt();
        if scale == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for u in &q {
                let c = dot(&w, u);
                w.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
            }
        }
        let r = dot(&w, &w).sqrt();
        if r > 1e-12 * scale {
            w.iter_mut().for_each(|x| *x /= r);
            q.push(w);
        }
    }
    q
}

fn combine(basis: &[Vec<f64>], coeffs: &[f64], dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    for (c, b) in coeffs.iter().zip(basis) {
        out.iter_mut().zip(b).for_each(|(o, x)| *o += c * x);
    }
    out
}

fn cell_breaks(n: usize) -> Vec<f64> {
    (0..=n).map(|j| 2.0 * j as f64 / n as f64).collect()
}

/// `[a, b]` when `f` is the indicator of a single interval.
fn indicator_support(f: &[f64], breaks: &[f64]) -> Option<(f64, f64)> {
    let first = f.iter().position(|v| v.abs() > STEP_TOL)?;
    let last = f.iter().rposition(|v| v.abs() > STEP_TOL)?;
    f[first..=last]
        .iter()
        .all(|v| (v - 1.0).abs() <= STEP_TOL)
        .then(|| (breaks[first], breaks[last + 1]))
}

pub(crate) fn project(set: &FiniteSet, subspace: &Subspace) -> Result<Projection> {
    let dim = set.dim();
    match subspace {
        Subspace::Span { basis } => {
            if set.space.norm != Norm::L2 {
                return Err(Error::Unsupported(
                    "orthogonal projection needs an l2 target".into(),
                ));
            }
            if basis.is_empty() {
                return Err(Error::Precondition("empty basis".into()));
            }
            basis.iter().try_for_each(|b| set.space.check_point(b))?;
            let q = orthonormalize(basis);
            let coeffs: Vec<Vec<f64>> = set
                .points
                .iter()
                .map(|f| q.iter().map(|u| dot(f, u)).collect())
                .collect();
            let approximants = coeffs.iter().map(|c| combine(&q, c, dim)).collect();
            Ok(Projection {
                basis: q,
                coeffs,
                approximants,
            })
        }
        Subspace::TransportCells { n } => {
            let n = *n;
            let Norm::L1Step { breakpoints } = &set.space.norm else {
                return Err(Error::Unsupported(
                    "the transport projector needs step functions on [0, 2]".into(),
                ));
            };
            if n == 0 {
                return Err(Error::Precondition("n must be positive".into()));
            }
            let cells = cell_breaks(n);
            let mut edge = Vec::with_capacity(n + 1);
            for &t in &cells {
                let i = breakpoints.partition_point(|b| *b < t - STEP_TOL);
                if i >= breakpoints.len() || (breakpoints[i] - t).abs() > STEP_TOL {
                    return Err(Error::Precondition(format!(
                        "partition lacks the cell edge {t}"
                    )));
                }
                edge.push(i);
            }
            let basis: Vec<Vec<f64>> = (0..n)
                .map(|j| {
                    let mut v = vec![0.0; dim];
                    v[edge[j]..edge[j + 1]].iter_mut().for_each(|x| *x = 1.0);
                    v
                })
                .collect();
            let mut coeffs = Vec::with_capacity(set.points.len());
            for (i, f) in set.points.iter().enumerate() {
                let (a, b) = indicator_support(f, breakpoints).ok_or_else(|| {
                    Error::Unsupported(format!("point {i} is not an interval indicator"))
                })?;
                if (b - a - 1.0).abs() > STEP_TOL || !(-STEP_TOL..=1.0 + STEP_TOL).contains(&a) {
                    return Err(Error::Unsupported(format!(
                        "point {i} is not the indicator of [a, a + 1] with a in [0, 1]"
                    )));
                }
                let last_le = |x: f64| {
                    (0..n)
                        .rev()
                        .find(|&j| cells[j] <= x + STEP_TOL)
                        .unwrap_or(0)
                };
                let (j1, j2) = (last_le(a), last_le(a + 1.0));
                coeffs.push(
                    (0..n)
                        .map(|j| if (j1..=j2).contains(&j) { 1.0 } else { 0.0 })
                        .collect(),
                );
            }
            let approximants = coeffs
                .iter()
                .map(|c: &Vec<f64>| combine(&basis, c, dim))
                .collect();
            Ok(Projection {
                basis,
                coeffs,
                approximants,
            })
        }
    }
}

/// `max_f ||f - P f||` for the subspace's projector.
pub fn kolmogorov_upper(set: &FiniteSet, subspace: &Subspace) -> Result<WidthCertificate> {
    if set.points.is_empty() {
        return Err(Error::EmptySet);
    }
    let p = project(set, subspace)?;
    let value = set
        .points
        .iter()
        .zip(&p.approximants)
        .map(|(f, g)| set.space.distance_unchecked(f, g))
        .fold(0.0, f64::max);
    Ok(WidthCertificate {
        quantity: Quantity::KolmogorovWidth,
        n: subspace.dim() as u32,
        gamma: None,
        value,
        direction: Direction::Upper,
        witness: Witness::Subspace {
            subspace: subspace.clone(),
        },
    })
}

/// Lipschitz width certificate from a Kolmogorov one: the affine map
/// `g -> g0 + gamma g` on the unit ball of the subspace norm, with
/// `gamma = d_n + rad`.
pub fn tk_comparison(set: &FiniteSet, dn_upper: &WidthCertificate) -> Result<WidthCertificate> {
    let Witness::Subspace { subspace } = &dn_upper.witness else {
        return Err(Error::Precondition(
            "expected a Kolmogorov certificate with a subspace witness".into(),
        ));
    };
    let p = project(set, subspace)?;
    let rad = radius_upper(set)?;
    let gamma = dn_upper.value + rad.upper;
    let dim = set.dim();
    let k = p.basis.len();

    // Candidates for g0 in coefficient form: the projected radius center
    // (l2), the mean coefficient vector, and each distinct approximant when
    // there are few of them.
    let mut options: Vec<Vec<f64>> = Vec::new();
    if let Subspace::Span { .. } = subspace {
        options.push(p.basis.iter().map(|u| dot(&rad.center, u)).collect());
    }
    let mut mean = vec![0.0; k];
    for c in &p.coeffs {
        mean.iter_mut().zip(c).for_each(|(m, x)| *m += x);
    }
    mean.iter_mut().for_each(|m| *m /= p.coeffs.len() as f64);
    options.push(mean);
    let mut distinct: Vec<&Vec<f64>> = Vec::new();
    for c in &p.coeffs {
        if distinct.len() > 256 {
            distinct.clear();
            break;
        }
        if !distinct.contains(&c) {
            distinct.push(c);
        }
    }
    options.extend(distinct.into_iter().cloned());

    let spread = |c0: &[f64]| {
        let g0 = combine(&p.basis, c0, dim);
        p.approximants
            .iter()
            .map(|g| set.space.distance_unchecked(g, &g0))
            .fold(0.0, f64::max)
    };
    let c0 = options
        .iter()
        .map(|c| (spread(c), c))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, c)| c.clone())
        .expect("at least one option");

    let candidates: Vec<Vec<f64>> = p
        .coeffs
        .iter()
        .map(|c| {
            if gamma > 0.0 {
                c.iter().zip(&c0).map(|(x, y)| (x - y) / gamma).collect()
            } else {
                vec![0.0; k]
            }
        })
        .collect();
    let map = LipschitzMapSpec::AffineBall(AffineBall {
        target: set.space.clone(),
        g0: combine(&p.basis, &c0, dim),
        gamma,
        basis: p.basis,
    });
    let mut cert = fixed_width_upper(set, &map, &candidates)?;
    cert.n = dn_upper.n;
    if cert.value > dn_upper.value + 1e-9 {
        return Err(Error::Numeric(format!(
            "Lipschitz certificate {} exceeds the Kolmogorov bound {}",
            cert.value, dn_upper.value
        )));
    }
    Ok(cert)
}
