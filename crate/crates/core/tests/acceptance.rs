//! Acceptance suite. Prints one line per criterion and exits nonzero when a
//! criterion fails that is not listed in `KNOWN_UNATTAINABLE`.

use std::f64::consts::SQRT_2;
use std::time::Instant;

use lipwidth_core::cases::{
    collapse_certificates, coordinate_subspace, diagonal_set, hilbert_example,
    octahedron_coordinate_upper, separation_certificates, sequence_set, stechkin_value,
    transport_params, transport_set, BasisSet, DiagonalSetSpec, SequenceSetSpec, Sigma,
    TransportSpec,
};
use lipwidth_core::covering::{greedy_packing, inner_entropy, minimal_inner_covering};
use lipwidth_core::experiment::audit_all;
use lipwidth_core::maps::{empirical_lipschitz, BumpSum, LipschitzMapSpec};
use lipwidth_core::metric::{radius_upper, DistanceTable};
use lipwidth_core::relu::{
    default_grid_per_axis, forward, lip_bound, verify_lipschitz, ReLUNetConfig, Sampling,
};
use lipwidth_core::width::{
    kolmogorov_upper, tk_comparison, width_upper_from_entropy, Subspace, Witness,
};
use lipwidth_core::{Error, FiniteSet, MetricSet, Norm, NormedSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria whose literal statement cannot hold; their corrected companions
/// are still required to pass.
const KNOWN_UNATTAINABLE: [u32; 2] = [1, 6];

type Criterion = (u32, &'static str, fn() -> Outcome);

struct Outcome {
    /// The criterion exactly as stated.
    literal: bool,
    /// Checks that must hold regardless (equal to `literal` unless the
    /// criterion is known to be unattainable).
    required: bool,
    note: String,
}

impl Outcome {
    fn plain(ok: bool, note: impl Into<String>) -> Self {
        Self {
            literal: ok,
            required: ok,
            note: note.into(),
        }
    }
}

fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

fn random_set(rng: &mut ChaCha8Rng, max_points: usize) -> FiniteSet {
    let m = rng.gen_range(2..=max_points);
    let dim = rng.gen_range(1..=4);
    let norm = [Norm::L1, Norm::L2, Norm::LInf][rng.gen_range(0..3)].clone();
    let points = (0..m)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect())
        .collect();
    FiniteSet::new(NormedSpace::new(dim, norm).unwrap(), points).unwrap()
}

fn dist(set: &FiniteSet, a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect();
    match set.space.norm {
        Norm::L1 => d.iter().sum(),
        Norm::L2 => d.iter().map(|x| x * x).sum::<f64>().sqrt(),
        Norm::LInf => d.iter().copied().fold(0.0, f64::max),
        _ => unreachable!("random sets use l1, l2, l_inf"),
    }
}

/// Smallest number of closed eps-balls centred in the set, by enumeration.
fn brute_cover(set: &FiniteSet, eps: f64) -> usize {
    let m = set.points.len();
    let covers: Vec<u32> = (0..m)
        .map(|c| {
            (0..m)
                .filter(|&i| dist(set, &set.points[c], &set.points[i]) <= eps)
                .fold(0u32, |acc, i| acc | (1 << i))
        })
        .collect();
    let full = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
    (1u32..(1 << m))
        .filter(|s| {
            (0..m)
                .filter(|c| s & (1 << c) != 0)
                .fold(0u32, |acc, c| acc | covers[c])
                == full
        })
        .map(|s| s.count_ones() as usize)
        .min()
        .unwrap()
}

fn is_packing(set: &FiniteSet, idx: &[usize], eps: f64) -> bool {
    idx.iter().enumerate().all(|(a, &i)| {
        idx[a + 1..]
            .iter()
            .all(|&j| dist(set, &set.points[i], &set.points[j]) > eps)
    })
}

fn is_cover(set: &FiniteSet, centers: &[usize], eps: f64) -> bool {
    set.points
        .iter()
        .all(|p| centers.iter().any(|&c| dist(set, p, &set.points[c]) <= eps))
}

fn criterion_1() -> Outcome {
    let mut literal = true;
    let mut required = true;
    let mut worst_gap = 0.0f64;
    for n in 1..=8u32 {
        let m = 1usize << (n + 2);
        let set = sequence_set(&SequenceSetSpec {
            sigma: Sigma::LogInv,
            truncation: m,
        })
        .unwrap();
        let e = inner_entropy(&set, n).unwrap();
        let width_ok = e.width() <= 1e-6 * e.upper;
        let stated = 1.0 / n as f64;
        // Origin plus sigma_1 e_1, ..., sigma_(2^n - 1) e_(2^n - 1) leave
        // sigma_(2^n) e_(2^n) at distance sigma_(2^n).
        let exact = 1.0 / ((1u64 << n) as f64 + 1.0).log2();
        literal &= width_ok && e.contains(stated, 0.0);
        required &= width_ok && e.contains(exact, 1e-12);
        worst_gap = worst_gap.max((stated - exact).abs() / stated);
    }
    Outcome {
        literal,
        required,
        note: format!(
            "brackets contain sigma_(2^n) = 1/log2(2^n+1) exactly; stated 1/n differs by up to {:.3}%",
            100.0 * worst_gap
        ),
    }
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut violations = 0usize;
    let mut checked = 0usize;
    for _ in 0..200 {
        let set = random_set(&mut rng, 20);
        let diam = set.max_distance().max(1e-9);
        for _ in 0..20 {
            let eps = diam * rng.gen_range(-5.0f64..=0.2).exp2();
            let p1 = greedy_packing(&set, eps).unwrap();
            let cov = minimal_inner_covering(&set, eps).unwrap();
            let p2 = greedy_packing(&set, 2.0 * eps).unwrap();
            let mut ok = cov.exact
                && is_cover(&set, &cov.center_indices, eps)
                && is_packing(&set, &p1.indices, eps)
                && is_packing(&set, &p2.indices, 2.0 * eps)
                && p1.size >= cov.size()
                && cov.size() >= p2.size;
            if set.points.len() <= 12 {
                ok &= brute_cover(&set, eps) == cov.size();
            }
            checked += 1;
            if !ok {
                violations += 1;
            }
        }
    }
    Outcome::plain(
        violations == 0,
        format!("{checked} (set, eps) pairs, {violations} violations"),
    )
}

/// `Phi(y)` straight from the bump formula.
fn bump_oracle(b: &BumpSum, y: &[f64]) -> Vec<f64> {
    let mut out = b.offset.clone().unwrap_or_else(|| vec![0.0; b.target.dim]);
    for j in 0..b.len() {
        let r = b
            .center(j)
            .iter()
            .zip(y)
            .map(|(c, v)| (c - v).abs())
            .fold(0.0, f64::max);
        let h = b.amplitudes[j] * (1.0 - r / b.radii[j]).max(0.0);
        if h != 0.0 {
            for (o, f) in out.iter_mut().zip(b.direction(j)) {
                *o += h * f;
            }
        }
    }
    out
}

fn criterion_3() -> Outcome {
    let pairs_kn: Vec<(u32, u32)> = (1..=12u32)
        .flat_map(|k| {
            (1..=12u32)
                .filter(move |n| k * n <= 12)
                .map(move |n| (k, n))
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut bad = Vec::new();
    for i in 0..50 {
        let set = random_set(&mut rng, 20);
        let (k, n) = pairs_kn[i % pairs_kn.len()];
        let cert = width_upper_from_entropy(&set, k, n).unwrap();
        let e = inner_entropy(&set, k * n).unwrap();
        let Witness::Map { map, candidates } = &cert.witness else {
            bad.push(format!("set {i}: unexpected witness"));
            continue;
        };
        let LipschitzMapSpec::BumpSum(bump) = map else {
            bad.push(format!("set {i}: not a bump map"));
            continue;
        };
        let rad = radius_upper(&set).unwrap();
        let gamma = (k as f64).exp2() * rad.upper;
        let declared = map.declared_lipschitz();
        let empirical = empirical_lipschitz(map, 100 + i as u64, 10_000).unwrap();
        let residual = set
            .points
            .iter()
            .zip(candidates)
            .map(|(f, y)| dist(&set, f, &bump_oracle(bump, y)))
            .fold(0.0, f64::max);
        let ok = cert.gamma == Some(gamma)
            && declared <= gamma * (1.0 + 1e-12)
            && empirical <= declared * (1.0 + 1e-9)
            && (rel_close(residual, cert.value, 1e-9) || (residual == 0.0 && cert.value == 0.0));
        let ok = ok && cert.value <= e.upper + 1e-9;
        if !ok {
            bad.push(format!("set {i} (k={k}, n={n})"));
        }
    }
    Outcome::plain(bad.is_empty(), format!("50 sets; failures: {bad:?}"))
}

fn criterion_4() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for n in [6u32, 8, 10] {
        let r = separation_certificates(n, 3.0, 40 + n as u64).unwrap();
        let nf = n as f64;
        let target = 1.0 / (nf * (nf + 1.0).log2());
        let ratio = r.upper.value / (1.0 / nf);
        let this = rel_close(r.upper.value, target, 1e-6)
            && ratio <= (1.0 / (nf + 1.0).log2()) * (1.0 + 1e-6)
            && r.lower.value > 0.0
            && r.lower.value <= r.upper.value
            && r.upper.verify(None).is_ok()
            && r.lower.verify(None).is_ok();
        ok &= this;
        notes.push(format!(
            "n={n}: upper {:.6e}, lower {:.3e}",
            r.upper.value, r.lower.value
        ));
    }
    Outcome::plain(ok, notes.join("; "))
}

fn criterion_5() -> Outcome {
    let (c, gamma) = (1.0f64, 4.0f64);
    let r = collapse_certificates(c, gamma, &[1_000, 1_000_000], 5).unwrap();
    let m0 = (1.0 / c).floor().max(1.0);
    let holds = |n: u32| {
        let cn = c * n as f64;
        cn > 1.0 && m0 + m0 / (cn - 1.0) <= (gamma / 2.0).powi(n as i32)
    };
    let first = (1..100).find(|&n| holds(n)).unwrap();
    let v3 = r.certificates[0].1.value;
    let v6 = r.certificates[1].1.value;
    let ok = r.n1 == first
        && holds(r.n1)
        && v3 <= 1e-3
        && v6 <= 1e-6
        && r.checks.iter().all(|c| c.holds);
    Outcome::plain(
        ok,
        format!("n1 = {}, sigma_1e3 = {v3:e}, sigma_1e6 = {v6:e}", r.n1),
    )
}

/// Inner covering radius of sorted 1D samples with distance `2|a-b|` by
/// bisection over pairwise distances with a greedy left-to-right check.
fn interval_cover_oracle(params: &[f64], k: usize) -> f64 {
    let fits = |r: f64| {
        let mut used = 0;
        let mut i = 0;
        while i < params.len() {
            let start = params[i];
            let mut c = i;
            while c + 1 < params.len() && 2.0 * (params[c + 1] - start) <= r {
                c += 1;
            }
            let center = params[c];
            while i < params.len() && 2.0 * (params[i] - center) <= r {
                i += 1;
            }
            used += 1;
        }
        used <= k
    };
    let mut cands: Vec<f64> = params.iter().map(|p| 2.0 * (p - params[0])).collect();
    cands.sort_by(f64::total_cmp);
    let (mut lo, mut hi) = (0usize, cands.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if fits(cands[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    cands[lo]
}

fn criterion_6() -> Outcome {
    let spec = TransportSpec { grid: 1024 };
    let params = transport_params(&spec).unwrap();
    let table = DistanceTable::build(&params);
    let mut literal_entropy = true;
    let mut corrected = true;
    for n in 1..=8u32 {
        let e = inner_entropy(&table, n).unwrap();
        literal_entropy &= e.contains((1.0 - n as f64).exp2(), 0.0);
        let oracle = interval_cover_oracle(&params.params, 1 << n);
        corrected &= e.contains(oracle, 1e-12) && e.upper <= (1.0 - n as f64).exp2();
    }
    let cells = [4usize, 16, 64];
    let set = transport_set(&spec, &cells).unwrap();
    let mut kolmogorov = true;
    let mut values = Vec::new();
    for &n in &cells {
        let c = kolmogorov_upper(&set, &Subspace::TransportCells { n }).unwrap();
        let nf = n as f64;
        // Best union of consecutive cells for each a, by enumeration.
        let best = params
            .params
            .iter()
            .map(|&a| {
                let mut m = f64::INFINITY;
                for j1 in 0..n {
                    for j2 in j1..n {
                        let (l, r) = (2.0 * j1 as f64 / nf, 2.0 * (j2 + 1) as f64 / nf);
                        m = m.min((l - a).abs() + (r - (a + 1.0)).abs());
                    }
                }
                m.min(1.0)
            })
            .fold(0.0, f64::max);
        kolmogorov &= c.value <= 4.0 / nf && c.value >= 1.0 / (nf + 1.0) && c.value >= best - 1e-12;
        values.push(format!("d_{n} <= {:.4}", c.value));
    }
    Outcome {
        literal: literal_entropy && kolmogorov,
        required: corrected && kolmogorov,
        note: format!(
            "entropy brackets contain 2^(-n+1): {literal_entropy}; they match the exact grid covering radius (about 2^-n) and stay below 2^(-n+1); {}",
            values.join(", ")
        ),
    }
}

fn criterion_7() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    let diag = diagonal_set(&DiagonalSetSpec { truncation: 40 }).unwrap();
    for n in [4usize, 8, 16] {
        let sub = coordinate_subspace(40, &(0..n).collect::<Vec<_>>());
        let dn = kolmogorov_upper(&diag, &sub).unwrap();
        let tk = tk_comparison(&diag, &dn).unwrap();
        let closed = 1.0 / ((n as f64 + 2.0).ln() / std::f64::consts::LN_2).sqrt();
        ok &= tk.value <= dn.value + 1e-9 && rel_close(dn.value, closed, 1e-12);
        ok &= tk.verify(Some(&diag)).is_ok();
        notes.push(format!(
            "diagonal n={n}: {:.4} <= {:.4}",
            tk.value, dn.value
        ));
    }
    let tspec = TransportSpec { grid: 257 };
    let tset = transport_set(&tspec, &[4, 16]).unwrap();
    for n in [4usize, 16] {
        let dn = kolmogorov_upper(&tset, &Subspace::TransportCells { n }).unwrap();
        let tk = tk_comparison(&tset, &dn).unwrap();
        ok &= tk.value <= dn.value + 1e-9 && tk.verify(Some(&tset)).is_ok();
        notes.push(format!(
            "transport n={n}: {:.4} <= {:.4}",
            tk.value, dn.value
        ));
    }
    Outcome::plain(ok, notes.join("; "))
}

fn criterion_8() -> Outcome {
    let mut ok = true;
    for n in 1..=100u32 {
        let oracle = (0.5f64 / ((2.0 * n as f64 + 1.0).ln() / std::f64::consts::LN_2)).sqrt();
        ok &= (stechkin_value(n) - oracle).abs() <= 4.0 * f64::EPSILON * oracle;
    }
    let mut notes = Vec::new();
    for n in [1u32, 2, 4] {
        let c = octahedron_coordinate_upper(n).unwrap();
        ok &= c.value >= stechkin_value(n);
        notes.push(format!("n={n}: {:.4} >= {:.4}", c.value, stechkin_value(n)));
    }
    Outcome::plain(ok, notes.join("; "))
}

/// `(d + 1 + n(d + 2)) W^n + (W^n - 1)/(W - 1)`.
fn c_n_oracle(d: u128, w: u128, n: u32) -> u128 {
    let wn = w.pow(n);
    (d + 1 + n as u128 * (d + 2)) * wn + (wn - 1) / (w - 1)
}

fn criterion_9() -> Outcome {
    let mut ok = true;
    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for d in 1..=3usize {
        for w in 2..=3usize {
            for n in 1..=5usize {
                let net = ReLUNetConfig::new(d, w, n).unwrap();
                let trace = lip_bound(&net);
                let c_n = c_n_oracle(d as u128, w as u128, n as u32);
                ok &= trace.constants.last().unwrap() == &c_n.to_string();
                ok &= c_n < (2 * d as u128 + 5) * n as u128 * (w as u128).pow(n as u32)
                    && trace.strict;
                let check = verify_lipschitz(
                    &net,
                    1000 + (d * 100 + w * 10 + n) as u64,
                    10_000,
                    default_grid_per_axis(d),
                    Sampling::Full,
                )
                .unwrap();
                ok &= check.max_ratio <= c_n as f64 && check.pass;
                worst = worst.max(check.max_ratio / c_n as f64);
                let p = net.param_count();
                for _ in 0..1_000 {
                    let y: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                    let x: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..=1.0)).collect();
                    if matches!(forward(&net, &y, &x), Err(Error::LayerBound { .. })) {
                        ok = false;
                    }
                }
            }
        }
    }
    Outcome::plain(ok, format!("30 shapes; largest ratio / C_n = {worst:.4}"))
}

fn criterion_10() -> Outcome {
    let gamma = 2.0 * SQRT_2;
    let r = hilbert_example(14, gamma, 2).unwrap();
    // sqrt2 / (12 * 2 sqrt2) = 1/24 and 4 * 2^-7 = 1/32.
    let threshold = 1.0 / 24.0 > 1.0 / 32.0;
    let set = BasisSet {
        count: (1 << 14) + 1,
    };
    let brackets = (1..=14).all(|k| inner_entropy(&set, k).unwrap().contains(SQRT_2, 0.0));
    let ok = threshold
        && r.threshold_holds
        && brackets
        && r.entropy.iter().all(|e| e.contains(SQRT_2, 0.0));
    Outcome::plain(
        ok,
        format!("threshold {} > {}", r.threshold_lhs, r.threshold_rhs),
    )
}

fn criterion_11() -> Outcome {
    let a = audit_all(11).canonical_json();
    let b = audit_all(11).canonical_json();
    let status = lipwidth_core::experiment::RunReport::from_json(&a)
        .unwrap()
        .exit_code();
    Outcome::plain(
        a == b && status == 0,
        format!("{} bytes, exit code {status}", a.len()),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "entropy exactness", criterion_1),
        (2, "sandwich inequalities", criterion_2),
        (3, "entropy map pipeline", criterion_3),
        (4, "separation", criterion_4),
        (5, "collapse", criterion_5),
        (6, "transport manifold", criterion_6),
        (7, "kolmogorov comparison", criterion_7),
        (8, "stechkin value", criterion_8),
        (9, "relu bound", criterion_9),
        (10, "hilbert example", criterion_10),
        (11, "determinism", criterion_11),
    ];
    let filter: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut unexpected = 0;
    for (id, name, f) in criteria {
        if filter.is_some_and(|k| k != id) {
            continue;
        }
        let start = Instant::now();
        let out = f();
        let secs = start.elapsed().as_secs_f64();
        let known = KNOWN_UNATTAINABLE.contains(&id);
        let verdict = if out.literal { "PASS" } else { "FAIL" };
        let tag = match (out.literal, known, out.required) {
            (false, true, true) => " [known unattainable; corrected checks pass]",
            (true, true, _) => " [listed unattainable but passed]",
            _ => "",
        };
        println!(
            "criterion {id:>2} {name}: {verdict}{tag} ({secs:.1}s) {}",
            out.note
        );
        if !out.required || (!out.literal && !known) {
            unexpected += 1;
        }
    }
    if unexpected > 0 {
        eprintln!("{unexpected} criteria failed");
        std::process::exit(1);
    }
}
