use std::f64::consts::SQRT_2;

use super::commands::{entropy_rows, kolmogorov_stage};
use super::config::{CaseStudy, Command, ExperimentConfig, GammaSpec, Params, Target};
use super::report::{Recorder, RunReport};
use crate::cases::{
    collapse_certificates, coordinate_subspace, diagonal_reference, diagonal_set, hilbert_example,
    octahedron_coordinate_upper, separation_certificates, sequence_set, stechkin_value,
    transport_params, transport_reference, transport_set, DiagonalSetSpec, SequenceSetSpec, Sigma,
    TransportSpec,
};
use crate::covering::InequalityCheck;
use crate::error::{Error, Result};
use crate::metric::DistanceTable;
use crate::width::{carl_transfer_check, GammaSchedule, Subspace, WidthBound};

/// Grid used for the transport Kolmogorov stage.
const TRANSPORT_KOLMOGOROV_GRID: usize = 257;
/// Largest transport grid tabulated for the entropy stage.
const TRANSPORT_TABLE_MAX: usize = 4096;

/// Run one named case study.
pub fn run_case_study(name: CaseStudy, params: Params, seed: u64) -> Result<RunReport> {
    let mut cfg = ExperimentConfig::new(Command::CaseStudy);
    cfg.target = Some(Target::CaseStudy(name));
    cfg.params = params;
    cfg.seed = seed;
    super::run(&cfg)
}

fn constant_gamma(p: &Params, default: f64) -> Result<f64> {
    match &p.gamma {
        None => Ok(default),
        Some(GammaSpec::Constant { gamma }) => Ok(*gamma),
        Some(_) => Err(Error::Config(
            "this case study takes a constant gamma".into(),
        )),
    }
}

fn ns_or(p: &Params, default: impl IntoIterator<Item = u32>) -> Vec<u32> {
    p.n.as_ref()
        .map(|n| n.values())
        .unwrap_or_else(|| default.into_iter().collect())
}

pub(crate) fn case_study_into(
    rec: &mut Recorder,
    name: CaseStudy,
    p: &Params,
    seed: u64,
) -> Result<()> {
    match name {
        CaseStudy::Separation => separation(rec, p, seed),
        CaseStudy::Collapse => collapse(rec, p, seed),
        CaseStudy::Hilbert => hilbert(rec, p),
        CaseStudy::Transport => transport(rec, p),
        CaseStudy::Diagonal => diagonal(rec, p),
        CaseStudy::Stechkin => stechkin(rec, p),
        CaseStudy::SequenceEntropy => sequence_entropy(rec, p),
    }
}

/// Outer entropy lower bound for `sigma_j = 1 / log2(j + 1)`: half the inner
/// value `1 / log2(2^m + 1)`.
fn log_inv_outer_lower(m: u64) -> f64 {
    let m = m as f64;
    let l = m + (-m).exp2().ln_1p() / std::f64::consts::LN_2;
    0.5 / l * (1.0 - 1e-12)
}

fn separation(rec: &mut Recorder, p: &Params, seed: u64) -> Result<()> {
    let gamma = constant_gamma(p, 3.0)?;
    for n in ns_or(p, [6]) {
        let label = format!("separation n={n} gamma={gamma}");
        rec.attempt(&label, |r| {
            let rep = separation_certificates(n, gamma, seed)?;
            r.checks(&label, rep.checks.clone());
            r.certificate(format!("{label} upper"), &rep.upper, None);
            r.certificate(format!("{label} lower"), &rep.lower, None);
            r.row(
                "separation",
                &label,
                Some(n),
                Some(rep.lower.value),
                Some(rep.upper.value),
                Some(rep.entropy_reference),
            );
            r.row(
                "separation entropy",
                &label,
                Some(n),
                None,
                Some(rep.entropy_exact),
                Some(rep.entropy_reference),
            );

            let bound = WidthBound {
                n,
                gamma: GammaSchedule::Constant { gamma },
                c0: rep.upper.value * n as f64,
                alpha: 1.0,
                beta: 0.0,
            };
            let carl = carl_transfer_check(&bound, 0.5, log_inv_outer_lower);
            r.check(InequalityCheck::ge(
                format!("{label}: transferred entropy bound >= entropy lower"),
                carl.implied_entropy_upper,
                carl.entropy_lower,
            ));
            r.detail(format!("{label} transfer"), &carl);
            r.detail(label.clone(), &rep);
            Ok(())
        });
    }
    Ok(())
}

fn collapse(rec: &mut Recorder, p: &Params, seed: u64) -> Result<()> {
    let gamma = constant_gamma(p, 4.0)?;
    let c = p.c.unwrap_or(1.0);
    let counts = p.counts.clone().unwrap_or_else(|| vec![1_000, 1_000_000]);
    let label = format!("collapse c={c} gamma={gamma}");
    rec.attempt(&label, |r| {
        let rep = collapse_certificates(c, gamma, &counts, seed)?;
        r.checks(&label, rep.checks.clone());
        let last = rep.scan.last().expect("scan ends at n1");
        r.check(InequalityCheck::le(
            format!("{label}: tail bound <= (gamma/2)^n1"),
            last.bound,
            last.rhs,
        ));
        for (big_n, cert) in &rep.certificates {
            let sub = format!("{label} N={big_n}");
            let reference = (*big_n as f64).powf(-c);
            r.check(InequalityCheck::le_tol(
                format!("{sub}: upper <= N^-c"),
                cert.value,
                reference,
                1e-12,
            ));
            r.certificate(sub.clone(), cert, None);
            r.row(
                "collapse",
                &sub,
                Some(rep.n1),
                None,
                Some(cert.value),
                Some(reference),
            );
        }
        r.detail(label.clone(), &rep);
        Ok(())
    });
    Ok(())
}

fn hilbert(rec: &mut Recorder, p: &Params) -> Result<()> {
    let gamma = constant_gamma(p, 2.0 * SQRT_2)?;
    let m = p.m.unwrap_or(14);
    let s = p.s.unwrap_or(2);
    let label = format!("hilbert m={m} gamma={gamma} s={s}");
    rec.attempt(&label, |r| {
        let rep = hilbert_example(m, gamma, s)?;
        for e in &rep.entropy {
            let l = format!("{label} k={}", e.n);
            r.holds(
                format!("{l}: bracket contains sqrt 2"),
                e.contains(SQRT_2, 1e-12),
            );
            r.entropy(l, e, Some(SQRT_2));
        }
        r.row(
            "hilbert threshold",
            &label,
            Some(s),
            Some(rep.threshold_rhs),
            Some(rep.threshold_lhs),
            None,
        );
        r.certificate(format!("{label} packing lower"), &rep.packing_lower, None);
        if let Some(lower) = &rep.lower {
            r.check(InequalityCheck::le(
                format!("{label}: packing lower <= threshold lower"),
                rep.packing_lower.value,
                lower.value,
            ));
            r.certificate(format!("{label} threshold lower"), lower, None);
        }
        r.detail(label.clone(), &rep);
        Ok(())
    });
    Ok(())
}

fn transport(rec: &mut Recorder, p: &Params) -> Result<()> {
    let spec = TransportSpec {
        grid: p.grid.unwrap_or(TransportSpec::default().grid),
    };
    if spec.grid > TRANSPORT_TABLE_MAX {
        return Err(Error::Config(format!(
            "transport grid above {TRANSPORT_TABLE_MAX}"
        )));
    }
    let params = transport_params(&spec).map_err(|e| Error::Config(e.to_string()))?;
    let reference = transport_reference(&spec);
    let ns = ns_or(p, 1..=8);
    let table = DistanceTable::build(&params);
    entropy_rows(rec, "transport", &table, &ns, |n| {
        Some(reference.grid_entropy(n))
    });
    for &n in &ns {
        let label = format!("transport n={n}");
        rec.row(
            "transport reference",
            &label,
            Some(n),
            Some(reference.entropy_sharp(n)),
            Some(reference.entropy(n)),
            Some(reference.grid_entropy(n)),
        );
    }
    let bracket_uppers: Vec<(u32, f64)> = ns
        .iter()
        .filter_map(|&n| {
            let l = format!("transport n={n}");
            let upper = rec.entropy_upper(&l)?;
            Some((n, upper))
        })
        .collect();
    for (n, upper) in bracket_uppers {
        rec.check(InequalityCheck::le(
            format!("transport n={n}: entropy upper <= 2^(-n+1)"),
            upper,
            reference.entropy(n),
        ));
    }

    let kspec = TransportSpec {
        grid: spec.grid.min(TRANSPORT_KOLMOGOROV_GRID),
    };
    let kns: Vec<u32> = p
        .counts
        .as_ref()
        .map(|c| c.iter().map(|&x| x as u32).collect())
        .unwrap_or_else(|| vec![4, 16, 64]);
    let cells: Vec<usize> = kns.iter().map(|&n| n as usize).collect();
    let Some(set) = rec.attempt("transport step functions", |_| {
        transport_set(&kspec, &cells)
    }) else {
        return Ok(());
    };
    let kref = transport_reference(&kspec);
    for n in kns {
        let label = format!("transport cells n={n} grid={}", kspec.grid);
        let sub = Subspace::TransportCells { n: n as usize };
        if let Some(v) = kolmogorov_stage(rec, &label, &set, &sub, Some(kref.kolmogorov_upper(n))) {
            rec.check(InequalityCheck::le(
                format!("{label}: upper <= 4/n"),
                v,
                kref.kolmogorov_upper(n),
            ));
            rec.check(InequalityCheck::ge(
                format!("{label}: upper >= 1/(n+1)"),
                v,
                kref.kolmogorov_lower(n),
            ));
        }
    }
    Ok(())
}

fn diagonal(rec: &mut Recorder, p: &Params) -> Result<()> {
    let spec = DiagonalSetSpec {
        truncation: p.truncation.unwrap_or(40),
    };
    let set = diagonal_set(&spec).map_err(|e| Error::Config(e.to_string()))?;
    for n in ns_or(p, [4, 8, 16]) {
        if n as usize > spec.truncation {
            return Err(Error::Config(format!("n = {n} exceeds the truncation")));
        }
        let label = format!("diagonal n={n}");
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
    Ok(())
}

fn stechkin(rec: &mut Recorder, p: &Params) -> Result<()> {
    for n in 1..=100u32 {
        rec.row(
            "stechkin",
            "value",
            Some(n),
            None,
            None,
            Some(stechkin_value(n)),
        );
    }
    for n in ns_or(p, [1, 2, 4]) {
        let label = format!("octahedron n={n}");
        rec.attempt(&label, |r| {
            let c = octahedron_coordinate_upper(n)?;
            r.check(InequalityCheck::ge(
                format!("{label}: coordinate upper >= stechkin value"),
                c.value,
                stechkin_value(n),
            ));
            r.certificate(label.clone(), &c, None);
            Ok(())
        });
    }
    Ok(())
}

fn sequence_entropy(rec: &mut Recorder, p: &Params) -> Result<()> {
    for n in ns_or(p, 1..=8) {
        if n > 24 {
            return Err(Error::Config(format!(
                "n = {n} too large for a 2^(n+2) truncation"
            )));
        }
        let spec = SequenceSetSpec {
            sigma: Sigma::LogInv,
            truncation: 1usize << (n + 2),
        };
        let set = sequence_set(&spec).map_err(|e| Error::Config(e.to_string()))?;
        let exact = set.sigma(1usize << n);
        entropy_rows(
            rec,
            &format!("sequence M={}", spec.truncation),
            &set,
            &[n],
            |_| Some(exact),
        );
        rec.row(
            "sequence reference",
            "1/n",
            Some(n),
            None,
            None,
            Some(1.0 / n as f64),
        );
    }
    Ok(())
}
