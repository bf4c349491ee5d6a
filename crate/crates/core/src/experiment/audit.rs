use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cases::case_study_into;
use super::commands::{entropy_map_stage, relu_into};
use super::config::{CaseStudy, Command, ExperimentConfig, NSpec, Params};
use super::report::{Recorder, RunReport};
use crate::covering::sandwich_audit;
use crate::metric::{FiniteSet, Norm, NormedSpace};
use crate::relu::{ReLUNetConfig, Sampling};

const SANDWICH_SETS: usize = 20;
const SANDWICH_EPS: usize = 5;
const PIPELINE_SETS: usize = 6;
const PIPELINE_PAIRS: usize = 2_000;
const RELU_TRIALS: usize = 500;

/// Run the invariant suite with `seed`.
pub fn audit_all(seed: u64) -> RunReport {
    let mut cfg = ExperimentConfig::new(Command::AuditAll);
    cfg.seed = seed;
    super::run(&cfg).expect("audit-all config is valid")
}

/// Up to 20 uniform points in `[-1, 1]^dim`, `dim <= 4`, under a random
/// `l1`, `l2` or `l_inf` norm.
pub(crate) fn random_set(rng: &mut ChaCha8Rng, max_points: usize) -> FiniteSet {
    let m = rng.gen_range(2..=max_points);
    let dim = rng.gen_range(1..=4);
    let norm = match rng.gen_range(0..3) {
        0 => Norm::L1,
        1 => Norm::L2,
        _ => Norm::LInf,
    };
    let points = (0..m)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect())
        .collect();
    FiniteSet::new(NormedSpace::new(dim, norm).expect("valid norm"), points).expect("finite")
}

fn params(n: NSpec) -> Params {
    Params {
        n: Some(n),
        ..Params::default()
    }
}

pub(crate) fn audit_into(rec: &mut Recorder, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for i in 0..SANDWICH_SETS {
        let set = random_set(&mut rng, 20);
        let diam = crate::metric::MetricSet::max_distance(&set);
        let label = format!("sandwich set {i}");
        let eps: Vec<f64> = (0..SANDWICH_EPS)
            .map(|_| diam.max(1e-6) * rng.gen_range(-6.0f64..=0.0).exp2())
            .collect();
        rec.attempt(&label, |r| {
            let mut ok = true;
            for &e in &eps {
                ok &= sandwich_audit(&set, e)?.passed();
            }
            r.holds(
                format!("{label}: packing >= covering >= packing at twice eps"),
                ok,
            );
            Ok(())
        });
    }

    const KN: [(u32, u32); 5] = [(1, 1), (1, 2), (2, 2), (1, 3), (3, 2)];
    for i in 0..PIPELINE_SETS {
        let set = random_set(&mut rng, 12);
        let (k, n) = KN[i % KN.len()];
        entropy_map_stage(
            rec,
            &format!("pipeline set {i}"),
            &set,
            k,
            n,
            seed,
            PIPELINE_PAIRS,
        );
    }

    let studies = [
        (
            CaseStudy::SequenceEntropy,
            params(NSpec::List((1..=6).collect())),
        ),
        (CaseStudy::Separation, params(NSpec::One(6))),
        (
            CaseStudy::Collapse,
            Params {
                counts: Some(vec![1_000]),
                ..Params::default()
            },
        ),
        (
            CaseStudy::Transport,
            Params {
                n: Some(NSpec::List((1..=6).collect())),
                grid: Some(256),
                counts: Some(vec![4, 16]),
                ..Params::default()
            },
        ),
        (CaseStudy::Diagonal, Params::default()),
        (CaseStudy::Stechkin, Params::default()),
        (CaseStudy::Hilbert, Params::default()),
    ];
    for (name, p) in studies {
        if let Err(e) = case_study_into(rec, name, &p, seed) {
            rec.attempt(name.name(), |_| -> crate::Result<()> { Err(e) });
        }
    }

    for (d, w, n) in [(1, 2, 1), (2, 2, 2), (3, 3, 1)] {
        let net = ReLUNetConfig::new(d, w, n).expect("valid shape");
        relu_into(rec, &net, seed, RELU_TRIALS, None, Sampling::Full);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_sets_within_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let s = random_set(&mut rng, 20);
            assert!((2..=20).contains(&s.points.len()));
            assert!((1..=4).contains(&s.dim()));
        }
    }
}
