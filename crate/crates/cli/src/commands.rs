//! The four subcommands. Each returns a report; usage and input problems
//! come back as [`CliError`].

use std::path::Path;

use serde_json::json;

use histories_core::histories::evaluate;
use histories_core::linalg::{Ket, Operator};
use histories_core::scenarios::{
    canonical_experiment, canonical_observables, named_state, noncontextuality_experiment, Context,
    ContextReport, StateSource, EIGENSTATE_NAMES,
};
use histories_core::spectral::spectral_decompose;
use histories_core::tol;

use crate::args::{
    CanonicalArgs, ConsistencyArgs, ContextChoice, NoncontextArgs, RandomStates, SpectralArgs,
};
use crate::error::CliError;
use crate::files::{FamilyFile, InputLog, MatrixFile};
use crate::report::{Check, Report};

/// Tolerance for the physics checks on experiment reports.
pub const PHYSICS_TOL: f64 = 1e-10;
/// Tolerance for commutators of the built-in observables.
pub const EXACT_TOL: f64 = 1e-12;
/// `‖[B,C]‖_F` must exceed this for the two contexts to be distinct.
pub const NONCOMMUTING_THRESHOLD: f64 = 0.5;

fn random_source(r: &RandomStates, log: &mut InputLog) -> Option<StateSource> {
    match (r.random, r.seed) {
        (Some(count), Some(seed)) => {
            log.record("random", &count.to_string());
            log.record("seed", &seed.to_string());
            Some(StateSource::Random { count, seed })
        }
        _ => None,
    }
}

fn experiment_checks(r: &ContextReport, checks: &mut Vec<Check>) {
    for c in &r.contexts {
        let n = &c.context;
        checks.push(Check::at_most(
            format!("consistent({n})"),
            Some(c.max_offdiag),
            PHYSICS_TOL,
        ));
        checks.push(Check::at_most(
            format!("backward_conditionals({n})"),
            Some(c.max_backward_conditional_deviation),
            PHYSICS_TOL,
        ));
        checks.push(Check::at_most(
            format!("forward_conditionals({n})"),
            Some(c.max_forward_conditional_deviation),
            PHYSICS_TOL,
        ));
        checks.push(Check::at_most(
            format!("oracle_agreement({n})"),
            Some(c.max_oracle_deviation),
            PHYSICS_TOL,
        ));
        checks.push(Check::at_most(
            format!("probability_sum({n})"),
            Some(c.max_probability_sum_error),
            PHYSICS_TOL,
        ));
        checks.push(Check::at_most(
            format!("remainder({n})"),
            Some(c.max_remainder),
            EXACT_TOL,
        ));
        checks.push(Check::at_most(
            format!("completion_independence({n})"),
            Some(c.max_completion_deviation),
            EXACT_TOL,
        ));
        if let Some(x) = c.figure1_crosscheck {
            checks.push(Check::at_most(
                format!("model_crosscheck({n})"),
                Some(x),
                PHYSICS_TOL,
            ));
        }
    }
    if r.contexts.len() > 1 {
        checks.push(Check::at_most(
            "marginal_deviation",
            r.max_marginal_deviation,
            PHYSICS_TOL,
        ));
    }
}

fn eigenvalue_check(
    name: &str,
    op: &Operator,
    expected: &[f64],
) -> Result<(Check, Vec<f64>), CliError> {
    let got = spectral_decompose(op)?.eigenvalues().to_vec();
    let deviation = (got.len() == expected.len()).then(|| {
        got.iter()
            .zip(expected)
            .map(|(g, e)| (g - e).abs())
            .fold(0.0, f64::max)
    });
    Ok((
        Check::at_most(format!("eigenvalues({name})"), deviation, PHYSICS_TOL),
        got,
    ))
}

pub fn canonical(args: &CanonicalArgs) -> Result<Report, CliError> {
    let mut log = InputLog::default();
    log.record("command", "canonical");
    let contexts = match args.context {
        ContextChoice::B => vec![Context::B],
        ContextChoice::C => vec![Context::C],
        ContextChoice::Both => vec![Context::B, Context::C],
    };
    log.record("context", &format!("{:?}", args.context));
    let source = match random_source(&args.random, &mut log) {
        Some(s) => s,
        None => {
            let names: Vec<String> = if args.states.is_empty() {
                EIGENSTATE_NAMES.iter().map(|s| s.to_string()).collect()
            } else {
                args.states.clone()
            };
            let states = names
                .iter()
                .map(|n| {
                    named_state(n).ok_or_else(|| {
                        CliError::Usage(format!(
                            "unknown state '{n}' (expected one of e1, e2, e3, c2, c3, uniform)"
                        ))
                    })
                })
                .collect::<Result<Vec<Ket>, _>>()?;
            log.record("states", &names.join(","));
            StateSource::Explicit {
                states,
                provenance: format!("named states {}", names.join(", ")),
            }
        }
    };

    let report = canonical_experiment(&contexts, &source)?;
    let (a, b, c) = canonical_observables();
    let mut checks = Vec::new();
    for entry in &report.commutators {
        let check = if entry.name == "[B,C]" {
            Check::above(
                format!("noncommuting({})", entry.name),
                Some(entry.norm),
                NONCOMMUTING_THRESHOLD,
            )
        } else {
            Check::at_most(
                format!("commutes({})", entry.name),
                Some(entry.norm),
                EXACT_TOL,
            )
        };
        checks.push(check);
    }
    let mut eigenvalues = serde_json::Map::new();
    eigenvalues.insert("A".into(), json!(spectral_decompose(&a)?.eigenvalues()));
    for ctx in &contexts {
        let (op, expected): (&Operator, &[f64]) = match ctx {
            Context::B => (&b, &[1.0, 0.5, -1.0]),
            Context::C => (&c, &[2.0, 1.0, -1.0]),
        };
        let (check, got) = eigenvalue_check(ctx.label(), op, expected)?;
        checks.push(check);
        eigenvalues.insert(ctx.label().into(), json!(got));
    }
    experiment_checks(&report, &mut checks);
    if contexts.len() > 1 {
        checks.push(Check::at_most(
            "first_detector_deviation",
            Some(report.max_first_detector_deviation),
            PHYSICS_TOL,
        ));
    }
    let results = json!({
        "eigenvalues": eigenvalues,
        "experiment": report,
    });
    Ok(Report::new(report.seed, &log, results, checks))
}

pub fn noncontext(args: &NoncontextArgs) -> Result<Report, CliError> {
    let mut log = InputLog::default();
    log.record("command", "noncontext");
    let a = log.load_matrix(&args.observable)?;
    let partners = args
        .partners
        .iter()
        .map(|p| {
            let op = log.load_matrix(p)?;
            if op.dim() != a.dim() {
                return Err(CliError::input(
                    p.display().to_string(),
                    format!(
                        "dimension {} does not match the observable dimension {}",
                        op.dim(),
                        a.dim()
                    ),
                ));
            }
            Ok(op)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let source = random_source(&args.random, &mut log);

    let mut checks = vec![Check::at_most(
        "hermitian(A)",
        Some(a.hermiticity_residual()),
        tol::STRUCT,
    )];
    let mut commutators = Vec::new();
    for (k, p) in partners.iter().enumerate() {
        let label = format!("partner_{}", k + 1);
        checks.push(Check::at_most(
            format!("hermitian({label})"),
            Some(p.hermiticity_residual()),
            tol::STRUCT,
        ));
        let norm = a.commutator(p)?.frobenius_norm();
        commutators.push(json!({ "name": format!("[A,{label}]"), "norm": norm }));
        checks.push(Check::at_most(
            format!("commutes(A,{label})"),
            Some(norm),
            tol::STRUCT,
        ));
    }
    let seed = match &source {
        Some(StateSource::Random { seed, .. }) => Some(*seed),
        _ => None,
    };
    if checks.iter().any(|c| !c.pass) {
        let results = json!({ "commutators": commutators, "experiment": null });
        return Ok(Report::new(seed, &log, results, checks));
    }

    let a_dec = spectral_decompose(&a)?;
    let source = source.unwrap_or_else(|| StateSource::Explicit {
        states: (0..a.dim()).map(|i| Ket::basis(a.dim(), i)).collect(),
        provenance: format!("computational basis of C^{}", a.dim()),
    });
    let report = noncontextuality_experiment(&a, &partners, &source)?;
    experiment_checks(&report, &mut checks);
    let degenerate = a_dec.len() == 1;
    let results = json!({
        "observable": {
            "eigenvalues": a_dec.eigenvalues(),
            "ranks": a_dec.ranks(),
        },
        "mode": if degenerate { "degenerate-A" } else { "standard" },
        "experiment": report,
    });
    Ok(Report::new(report.seed, &log, results, checks))
}

pub fn consistency(args: &ConsistencyArgs) -> Result<Report, CliError> {
    let mut log = InputLog::default();
    log.record("command", "consistency");
    let text = log.read(&args.family)?;
    let origin = args.family.display().to_string();
    let file = FamilyFile::parse(&text, &origin)?;
    let base = args.family.parent().unwrap_or(Path::new("."));
    let family = file.build(base, &mut log)?;

    let r = evaluate(&family);
    let m = r.matrix.entries();
    let n = m.dim();
    let matrix: Vec<Vec<[f64; 2]>> = (0..n)
        .map(|i| (0..n).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect();
    let checks = vec![
        Check::at_most(
            "consistency",
            Some(r.consistency.max_offdiag),
            tol::CONSISTENCY,
        ),
        Check::at_most(
            "decoherence_trace",
            Some((r.matrix.trace() - 1.0).abs()),
            PHYSICS_TOL,
        ),
    ];
    let results = json!({
        "times": family.times(),
        "outcomes": r.matrix.outcomes(),
        "decoherence_matrix": matrix,
        "max_offdiag": r.consistency.max_offdiag,
        "consistent": r.consistency.consistent,
        "probabilities": r.probabilities,
    });
    Ok(Report::new(None, &log, results, checks))
}

pub fn spectral(args: &SpectralArgs) -> Result<Report, CliError> {
    let mut log = InputLog::default();
    log.record("command", "spectral");
    let x = log.load_matrix(&args.matrix)?;
    let residual = x.hermiticity_residual();
    let mut checks = vec![Check::at_most("hermitian", Some(residual), tol::STRUCT)];
    if !checks[0].pass {
        let results = json!({ "dim": x.dim(), "hermiticity_residual": residual });
        return Ok(Report::new(None, &log, results, checks));
    }
    let dec = spectral_decompose(&x)?;
    let reconstruction = dec.reconstruct().distance(&x)?;
    checks.push(Check::at_most(
        "reconstruction",
        Some(reconstruction),
        PHYSICS_TOL * x.frobenius_norm().max(1.0),
    ));
    let clusters: Vec<_> = dec
        .eigenvalues()
        .iter()
        .zip(dec.ranks())
        .map(|(v, r)| json!({ "eigenvalue": v, "rank": r }))
        .collect();
    let projectors: Vec<MatrixFile> = dec
        .projectors()
        .iter()
        .map(MatrixFile::from_operator)
        .collect();
    let results = json!({
        "dim": x.dim(),
        "hermiticity_residual": residual,
        "clusters": clusters,
        "projectors": projectors,
        "reconstruction_residual": reconstruction,
    });
    Ok(Report::new(None, &log, results, checks))
}
