use std::f64::consts::SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Command, ExperimentConfig, GammaSpec, Target};
use super::report::Recorder;
use crate::cases::{
    coordinate_subspace, diagonal_reference, diagonal_set, octahedron_set, sequence_set,
    stechkin_value, transport_params, transport_reference, transport_set, BasisSet,
    InfiniteSequenceSet, TransportParams, TransportSpec, HILBERT_MAX_M,
};
use crate::covering::{
    greedy_packing, inner_entropy, is_maximal_packing, sandwich_audit, InequalityCheck,
    PackingBound,
};
use crate::error::{Error, Result};
use crate::maps::empirical_lipschitz;
use crate::metric::{radius_upper, DistanceTable, FiniteSet, MetricSet};
use crate::relu::{
    default_grid_per_axis, forward, lip_bound, verify_lipschitz, ReLUNetConfig, Sampling,
};
use crate::width::{
    kolmogorov_upper, tk_comparison, width_lower_certified, width_upper_from_entropy, Subspace,
    Witness,
};

/// Largest explicit point cloud built from a closed-form target.
const DENSE_MAX_POINTS: usize = 4096;
/// Largest transport grid materialised as step functions.
const TRANSPORT_DENSE_MAX: usize = 512;
/// Largest closed-form set tabulated before covering.
const TABLE_MAX: usize = 2048;

pub(crate) const DEFAULT_PAIRS: usize = 10_000;
pub(crate) const DEFAULT_TRIALS: usize = 10_000;
pub(crate) const LAYER_PASSES: usize = 1_000;

fn target_err(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(format!("target: {other}")),
    }
}

fn n_label(n: u32) -> String {
    format!("n={n}")
}

/// Explicit point cloud for a target. `cells` adds cell edges to transport
/// partitions.
pub(crate) fn dense(target: &Target, cells: &[usize]) -> Result<FiniteSet> {
    let set = match target {
        Target::Set(s) => {
            s.validate()?;
            s.clone()
        }
        Target::SetFile(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            FiniteSet::from_json(&text)?
        }
        Target::Sequence(spec) => {
            if spec.truncation + 1 > DENSE_MAX_POINTS {
                return Err(Error::Config(format!(
                    "sequence truncation {} too large for an explicit set",
                    spec.truncation
                )));
            }
            sequence_set(spec)?.to_dense()
        }
        Target::Transport(spec) => {
            if spec.grid > TRANSPORT_DENSE_MAX {
                return Err(Error::Config(format!(
                    "transport grid {} too large for step functions (max {TRANSPORT_DENSE_MAX})",
                    spec.grid
                )));
            }
            transport_set(spec, cells)?
        }
        Target::Diagonal(spec) => diagonal_set(spec)?,
        Target::Octahedron { n } => octahedron_set(*n)?,
        Target::Hilbert { m } => {
            if *m > 11 {
                return Err(Error::Config(format!(
                    "hilbert m = {m} too large for an explicit set"
                )));
            }
            BasisSet {
                count: (1usize << m) + 1,
            }
            .to_dense()
        }
        Target::CaseStudy(_) | Target::Relu(_) => {
            return Err(Error::Config("not a set target".into()))
        }
    };
    if set.points.is_empty() {
        return Err(Error::Config("target set is empty".into()));
    }
    Ok(set)
}

fn hilbert_set(m: u32) -> Result<BasisSet> {
    if m == 0 || m > HILBERT_MAX_M {
        return Err(Error::Config(format!(
            "hilbert m must lie in 1..={HILBERT_MAX_M}"
        )));
    }
    Ok(BasisSet {
        count: (1usize << m) + 1,
    })
}

fn transport(spec: &TransportSpec) -> Result<TransportParams> {
    transport_params(spec).map_err(target_err)
}

pub(crate) fn command_into(rec: &mut Recorder, cfg: &ExperimentConfig) -> Result<()> {
    let target = cfg.target.as_ref().expect("validated");
    match cfg.command {
        Command::Entropy => entropy_into(rec, cfg, target),
        Command::Packing => packing_into(rec, cfg, target),
        Command::WidthUpper => width_upper_into(rec, cfg, target),
        Command::WidthLower => width_lower_into(rec, cfg, target),
        Command::Kolmogorov => kolmogorov_into(rec, cfg, target),
        Command::ReluVerify => {
            let Target::Relu(net) = target else {
                unreachable!("validated")
            };
            relu_into(
                rec,
                net,
                cfg.seed,
                cfg.params.trials.unwrap_or(DEFAULT_TRIALS),
                cfg.params.grid_per_axis,
                cfg.params.sampling.unwrap_or(Sampling::Full),
            );
            Ok(())
        }
        Command::CaseStudy | Command::AuditAll => unreachable!("dispatched in run"),
    }
}

/// Entropy brackets for each `n`, checked against `reference(n)` when one
/// is known.
pub(crate) fn entropy_rows<S: MetricSet + ?Sized>(
    rec: &mut Recorder,
    prefix: &str,
    set: &S,
    ns: &[u32],
    reference: impl Fn(u32) -> Option<f64>,
) {
    for &n in ns {
        let label = format!("{prefix} {}", n_label(n));
        rec.attempt(&label, |r| {
            let e = inner_entropy(set, n)?;
            r.check(InequalityCheck::le(
                format!("{label}: lower <= upper"),
                e.lower,
                e.upper,
            ));
            let want = reference(n);
            if let Some(x) = want {
                r.holds(
                    format!("{label}: bracket contains {x}"),
                    e.contains(x, 1e-9),
                );
            }
            r.entropy(label.clone(), &e, want);
            Ok(())
        });
    }
}

fn entropy_into(rec: &mut Recorder, cfg: &ExperimentConfig, target: &Target) -> Result<()> {
    let ns = cfg.n_values()?;
    match target {
        Target::Sequence(spec) => {
            let set = sequence_set(spec).map_err(target_err)?;
            let m = set.truncation();
            let sigma = set.sigma.clone();
            // Origin plus the first 2^n - 1 points cover at radius sigma_(2^n).
            entropy_rows(rec, "sequence", &set, &ns, |n| {
                (n < 63 && (1usize << n) <= m).then(|| sigma.term(1usize << n))
            });
        }
        Target::Transport(spec) => {
            let params = transport(spec)?;
            let reference = transport_reference(spec);
            if params.len() <= TABLE_MAX {
                let table = DistanceTable::build(&params);
                entropy_rows(rec, "transport", &table, &ns, |n| {
                    Some(reference.grid_entropy(n))
                });
            } else {
                entropy_rows(rec, "transport", &params, &ns, |n| {
                    Some(reference.grid_entropy(n))
                });
            }
        }
        Target::Hilbert { m } => {
            let set = hilbert_set(*m)?;
            let count = set.count;
            entropy_rows(rec, "hilbert", &set, &ns, |n| {
                (n < 63 && (1usize << n) < count).then_some(SQRT_2)
            });
        }
        _ => {
            let set = dense(target, &[]).map_err(target_err)?;
            entropy_rows(rec, "set", &set, &ns, |_| None);
        }
    }
    Ok(())
}

fn greedy_rows<S: MetricSet + ?Sized>(rec: &mut Recorder, set: &S, eps: &[f64]) {
    for &e in eps {
        let label = format!("eps={e}");
        rec.attempt(&label, |r| {
            let p1 = greedy_packing(set, e)?;
            let p2 = greedy_packing(set, 2.0 * e)?;
            r.holds(
                format!("{label}: eps packing is maximal"),
                is_maximal_packing(set, &p1.indices, e),
            );
            r.holds(
                format!("{label}: 2eps packing is maximal"),
                is_maximal_packing(set, &p2.indices, 2.0 * e),
            );
            r.row(
                "packing",
                &label,
                None,
                Some(p2.size as f64),
                Some(p1.size as f64),
                None,
            );
            Ok(())
        });
    }
}

fn packing_into(rec: &mut Recorder, cfg: &ExperimentConfig, target: &Target) -> Result<()> {
    let eps = cfg.params.eps.clone().expect("validated");
    match target {
        Target::Sequence(spec) => greedy_rows(rec, &sequence_set(spec).map_err(target_err)?, &eps),
        Target::Transport(spec) => greedy_rows(rec, &transport(spec)?, &eps),
        Target::Hilbert { m } => greedy_rows(rec, &hilbert_set(*m)?, &eps),
        _ => {
            let set = dense(target, &[]).map_err(target_err)?;
            for &e in &eps {
                let label = format!("eps={e}");
                rec.attempt(&label, |r| {
                    let s = sandwich_audit(&set, e)?;
                    r.checks(&label, s.checks.clone());
                    r.row(
                        "packing",
                        &label,
                        None,
                        Some(s.packing_2eps as f64),
                        Some(s.packing_eps as f64),
                        Some(s.covering_eps as f64),
                    );
                    r.detail(label.clone(), &s);
                    Ok(())
                });
            }
        }
    }
    Ok(())
}

/// Entropy-map certificate at `(k, n)` with its audits.
pub(crate) fn entropy_map_stage(
    rec: &mut Recorder,
    prefix: &str,
    set: &FiniteSet,
    k: u32,
    n: u32,
    seed: u64,
    pairs: usize,
) {
    let label = format!("{prefix} k={k} n={n}");
    rec.attempt(&label, |r| {
        let cert = width_upper_from_entropy(set, k, n)?;
        let e = inner_entropy(set, k * n)?;
        r.check(InequalityCheck::le(
            format!("{label}: width upper <= entropy upper + 1e-9"),
            cert.value,
            e.upper + 1e-9,
        ));
        let gamma = cert.gamma.expect("entropy certificates carry gamma");
        if let Witness::Map { map, .. } = &cert.witness {
            let declared = map.declared_lipschitz();
            r.check(InequalityCheck::le_tol(
                format!("{label}: declared <= 2^k rad"),
                declared,
                gamma,
                1e-12,
            ));
            let ratio = empirical_lipschitz(map, seed, pairs)?;
            r.check(InequalityCheck::le_tol(
                format!("{label}: empirical <= declared"),
                ratio,
                declared,
                1e-9,
            ));
        }
        r.certificate(label.clone(), &cert, Some(set));
        r.entropy(label.clone(), &e, None);
        Ok(())
    });
}

fn width_upper_into(rec: &mut Recorder, cfg: &ExperimentConfig, target: &Target) -> Result<()> {
    let ns = cfg.n_values()?;
    let k = cfg.params.k.expect("validated");
    let set = dense(target, &[]).map_err(target_err)?;
    let pairs = cfg.params.pairs.unwrap_or(DEFAULT_PAIRS);
    for n in ns {
        entropy_map_stage(rec, "width-upper", &set, k, n, cfg.seed, pairs);
    }
    Ok(())
}

fn lower_rows<P: PackingBound + Sync + ?Sized>(
    rec: &mut Recorder,
    set: &P,
    dense: Option<&FiniteSet>,
    ns: &[u32],
    gamma: impl Fn(u32) -> f64,
    eps: Option<&[f64]>,
) {
    for &n in ns {
        let g = gamma(n);
        let label = format!("width-lower n={n} gamma={g}");
        rec.attempt(&label, |r| {
            let cert = width_lower_certified(set, n, g, eps)?;
            r.check(InequalityCheck::le(
                format!("{label}: lower <= diameter"),
                cert.value,
                set.diameter_upper(),
            ));
            r.certificate(label.clone(), &cert, dense);
            Ok(())
        });
    }
}

fn width_lower_into(rec: &mut Recorder, cfg: &ExperimentConfig, target: &Target) -> Result<()> {
    let ns = cfg.n_values()?;
    let spec = cfg.params.gamma.clone().expect("validated");
    let eps = cfg.params.eps.as_deref();
    let schedule = spec.schedule();
    let fixed = move |n: u32| schedule.as_ref().expect("set-independent").at(n);
    match target {
        Target::Sequence(seq) if cfg.params.untruncated && spec != GammaSpec::TwoKRad => {
            seq.sigma.validate().map_err(target_err)?;
            let set = InfiniteSequenceSet {
                sigma: seq.sigma.clone(),
            };
            lower_rows(rec, &set, None, &ns, fixed, eps);
        }
        Target::Hilbert { m } if spec != GammaSpec::TwoKRad => {
            lower_rows(rec, &hilbert_set(*m)?, None, &ns, fixed, eps);
        }
        Target::Transport(t) if spec != GammaSpec::TwoKRad => {
            lower_rows(rec, &transport(t)?, None, &ns, fixed, eps);
        }
        _ => {
            let set = dense(target, &[]).map_err(target_err)?;
            let gamma: Box<dyn Fn(u32) -> f64> = match spec {
                GammaSpec::TwoKRad => {
                    let k = cfg.params.k.expect("validated");
                    let Some(rad) = rec.attempt("radius", |_| radius_upper(&set)) else {
                        return Ok(());
                    };
                    let g = (k as f64).exp2() * rad.upper;
                    Box::new(move |_| g)
                }
                _ => Box::new(fixed),
            };
            lower_rows(rec, &set, Some(&set), &ns, gamma, eps);
        }
    }
    Ok(())
}

/// Kolmogorov upper bound through `subspace` plus the Lipschitz certificate
/// derived from it.
pub(crate) fn kolmogorov_stage(
    rec: &mut Recorder,
    label: &str,
    set: &FiniteSet,
    subspace: &Subspace,
    reference: Option<f64>,
) -> Option<f64> {
    rec.attempt(label, |r| {
        let dn = kolmogorov_upper(set, subspace)?;
        let tk = tk_comparison(set, &dn)?;
        r.check(InequalityCheck::le(
            format!("{label}: lipschitz <= kolmogorov + 1e-9"),
            tk.value,
            dn.value + 1e-9,
        ));
        r.row(
            "kolmogorov",
            label,
            Some(dn.n),
            None,
            Some(dn.value),
            reference,
        );
        r.certificate(format!("{label} kolmogorov"), &dn, Some(set));
        r.certificate(format!("{label} lipschitz"), &tk, Some(set));
        Ok(dn.value)
    })
}

fn kolmogorov_into(rec: &mut Recorder, cfg: &ExperimentConfig, target: &Target) -> Result<()> {
    let ns = cfg.n_values()?;
    if let Some(sub) = &cfg.params.subspace {
        let set = dense(target, &[]).map_err(target_err)?;
        kolmogorov_stage(rec, &format!("subspace dim={}", sub.dim()), &set, sub, None);
        return Ok(());
    }
    match target {
        Target::Diagonal(spec) => {
            let set = diagonal_set(spec).map_err(target_err)?;
            for n in ns {
                let label = format!("diagonal {}", n_label(n));
                if n as usize > spec.truncation {
                    return Err(Error::Config(format!("{label} exceeds the truncation")));
                }
                let sub = coordinate_subspace(set.dim(), &(0..n as usize).collect::<Vec<_>>());
                let r = diagonal_reference(n);
                if let Some(v) = kolmogorov_stage(rec, &label, &set, &sub, Some(r)) {
                    rec.check(InequalityCheck::le_tol(
                        format!("{label}: upper <= reference"),
                        v,
                        r,
                        1e-12,
                    ));
                }
            }
        }
        Target::Transport(spec) => {
            let cells: Vec<usize> = ns.iter().map(|&n| n as usize).collect();
            let set = dense(target, &cells).map_err(target_err)?;
            let reference = transport_reference(spec);
            for n in ns {
                let label = format!("transport {}", n_label(n));
                let sub = Subspace::TransportCells { n: n as usize };
                let hi = reference.kolmogorov_upper(n);
                if let Some(v) = kolmogorov_stage(rec, &label, &set, &sub, Some(hi)) {
                    rec.check(InequalityCheck::le(format!("{label}: upper <= 4/n"), v, hi));
                    rec.check(InequalityCheck::ge(
                        format!("{label}: upper >= 1/(n+1)"),
                        v,
                        reference.kolmogorov_lower(n),
                    ));
                }
            }
        }
        Target::Octahedron { n } => {
            let set = octahedron_set(*n).map_err(target_err)?;
            let dim = set.dim();
            for k in ns {
                if k as usize > dim {
                    return Err(Error::Config(format!(
                        "n = {k} exceeds the dimension {dim}"
                    )));
                }
                let label = format!("octahedron first {} coordinates", n_label(k));
                let sub = coordinate_subspace(dim, &(0..k as usize).collect::<Vec<_>>());
                if let Some(v) = kolmogorov_stage(rec, &label, &set, &sub, Some(stechkin_value(*n)))
                {
                    if k == *n {
                        rec.check(InequalityCheck::ge(
                            format!("{label}: upper >= stechkin value"),
                            v,
                            stechkin_value(*n),
                        ));
                    }
                }
            }
        }
        _ => {
            return Err(Error::Config(
                "kolmogorov on this target needs params.subspace".into(),
            ))
        }
    }
    Ok(())
}

/// Sampled Lipschitz check, the exact constant comparison and layer-bound
/// forward passes for one network shape.
pub(crate) fn relu_into(
    rec: &mut Recorder,
    net: &ReLUNetConfig,
    seed: u64,
    trials: usize,
    grid_per_axis: Option<usize>,
    sampling: Sampling,
) {
    let label = format!("relu d={} W={} n={}", net.d, net.width, net.depth);
    rec.attempt(&label, |r| {
        let grid = grid_per_axis.unwrap_or_else(|| default_grid_per_axis(net.d));
        let check = verify_lipschitz(net, seed, trials, grid, sampling)?;
        let trace = lip_bound(net);
        r.check(InequalityCheck::le(
            format!("{label}: sampled ratio <= bound"),
            check.max_ratio,
            check.bound,
        ));
        r.holds(format!("{label}: C_n < C' n W^n"), trace.strict);
        r.row(
            "relu",
            &label,
            Some(net.depth as u32),
            Some(check.max_ratio),
            Some(check.bound),
            Some(check.coarse_bound),
        );
        r.detail(format!("{label} check"), &check);
        r.detail(format!("{label} constants"), &trace);

        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let p = net.param_count();
        let mut violations = 0usize;
        for _ in 0..LAYER_PASSES {
            let y: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let x: Vec<f64> = (0..net.d).map(|_| rng.gen_range(0.0..=1.0)).collect();
            match forward(net, &y, &x) {
                Ok(_) => {}
                Err(Error::LayerBound { .. }) => violations += 1,
                Err(e) => return Err(e),
            }
        }
        r.check(InequalityCheck::le(
            format!("{label}: layer bound violations in {LAYER_PASSES} passes"),
            violations as f64,
            0.0,
        ));
        Ok(())
    });
}
