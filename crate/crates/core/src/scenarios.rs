//! The canonical three-state example and the noncontextuality experiment.
//!
//! `A = diag(1, −1, −1)` is measured together with either
//! `B = diag(½, 1, −1)` or `C = 2|1⟩⟨1| + |2⟩⟨3| + |3⟩⟨2|`. Both commute with
//! `A`, but not with each other. The experiment runs each context over a set
//! of initial states and compares what the histories analysis says about `A`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::apparatus::{build_figure1, build_general, ApparatusModel, DetectorDistribution};
use crate::error::{Error, Result};
use crate::histories::{evaluate, Event, HistoryFamily};
use crate::linalg::{CompletionOrder, Ket, Operator, C64};
use crate::sampling::random_states;
use crate::spectral::{max_cross_commutator, spectral_decompose, ProjectiveDecomposition};
use crate::tol;

/// Which partner of `A` the canonical apparatus measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Context {
    B,
    C,
}

impl Context {
    pub fn label(self) -> &'static str {
        match self {
            Context::B => "B",
            Context::C => "C",
        }
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Context {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "B" | "b" => Ok(Context::B),
            "C" | "c" => Ok(Context::C),
            other => Err(Error::InvalidArgument(format!("unknown context {other:?}"))),
        }
    }
}

/// `(A, B, C)` of the three-state example, exact entries.
pub fn canonical_observables() -> (Operator, Operator, Operator) {
    let a = Operator::from_real_diagonal(&[1.0, -1.0, -1.0]);
    let b = Operator::from_real_diagonal(&[0.5, 1.0, -1.0]);
    let c = Operator::from_real_rows(&[&[2.0, 0.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 1.0, 0.0]])
        .expect("3x3");
    (a, b, c)
}

/// `U_B = I`, and `U_C = |1⟩⟨1| ⊕ (|2⟩⟨2| + |2⟩⟨3| + |3⟩⟨2| − |3⟩⟨3|)/√2`.
/// The upper path is untouched, hence the `|1⟩⟨1|` summand.
pub fn canonical_context_unitary(context: Context) -> Operator {
    match context {
        Context::B => Operator::identity(3),
        Context::C => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            Operator::from_real_rows(&[&[1.0, 0.0, 0.0], &[0.0, s, s], &[0.0, s, -s]]).expect("3x3")
        }
    }
}

/// The named states of the three-state example: `e1`, `e2`, `e3`, the `C`
/// eigenvectors `c2 = (|2⟩+|3⟩)/√2`, `c3 = (|2⟩−|3⟩)/√2`, and `uniform`.
pub fn named_state(name: &str) -> Option<Ket> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let u = 1.0 / 3f64.sqrt();
    let amps: [f64; 3] = match name {
        "e1" => [1.0, 0.0, 0.0],
        "e2" => [0.0, 1.0, 0.0],
        "e3" => [0.0, 0.0, 1.0],
        "c2" => [0.0, s, s],
        "c3" => [0.0, s, -s],
        "uniform" => [u, u, u],
        _ => return None,
    };
    Some(Ket::from_real(&amps).expect("non-empty"))
}

pub const EIGENSTATE_NAMES: [&str; 5] = ["e1", "e2", "e3", "c2", "c3"];

/// Detector outcomes at `t₂`: one per path, or one per final detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution {
    Coarse,
    Refined,
}

pub const T0: &str = "t0";
pub const T1: &str = "t1";
pub const T2: &str = "t2";

/// `[Ψ₀] ⊙ {P_α ⊗ I} ⊙ {outcomes}` for a model: trivial evolution to `t₁`,
/// then the apparatus unitary to `t₂`.
pub fn family_for_model(
    model: &ApparatusModel,
    psi: &Ket,
    resolution: Resolution,
) -> Result<HistoryFamily> {
    psi.ensure_normalized()?;
    let initial = model.prepare(psi)?;
    let t2 = match resolution {
        Resolution::Coarse => model.outcome_projectors(),
        Resolution::Refined => model.refined_outcome_projectors(),
    };
    HistoryFamily::new(
        initial,
        vec![T0.into(), T1.into(), T2.into()],
        vec![
            Operator::identity(model.composite_dim()),
            model.total_unitary().clone(),
        ],
        vec![model.particle_decomposition().lift(model.pointer_dim()), t2],
    )
}

/// The four-history family (plus remainder histories) of the three-state
/// apparatus: `[Ψ₀] ⊙ {P1, P2} ⊙ {D1, M1, R}`.
pub fn canonical_family(context: Context, psi: &Ket) -> Result<HistoryFamily> {
    if psi.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: psi.dim(),
        });
    }
    family_for_model(&build_figure1(context), psi, Resolution::Coarse)
}

/// Where the experiment's initial states come from.
#[derive(Debug, Clone)]
pub enum StateSource {
    Explicit {
        states: Vec<Ket>,
        provenance: String,
    },
    Random {
        count: usize,
        seed: u64,
    },
}

impl StateSource {
    fn materialize(&self, dim: usize) -> Result<(Vec<Ket>, String, Option<u64>)> {
        match self {
            StateSource::Explicit { states, provenance } => {
                for s in states {
                    if s.dim() != dim {
                        return Err(Error::DimensionMismatch {
                            expected: dim,
                            found: s.dim(),
                        });
                    }
                    s.ensure_normalized()?;
                }
                Ok((states.clone(), provenance.clone(), None))
            }
            StateSource::Random { count, seed } => Ok((
                random_states(dim, *count, *seed),
                format!("{count} states uniform on the unit sphere of C^{dim}"),
                Some(*seed),
            )),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CommutatorEntry {
    pub name: String,
    pub norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionalRecord {
    pub given: Event,
    pub query: Event,
    /// `None` when the conditioning event has probability ≤ τ_prob.
    pub value: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialContext {
    pub context: String,
    pub consistent: bool,
    pub max_offdiag: f64,
    /// Born-rule statistics from direct statevector evolution.
    pub detector_distribution: DetectorDistribution,
    /// `Pr(path α at t₂)` from the histories analysis.
    pub path_marginals: Vec<(String, f64)>,
    pub conditionals: Vec<ConditionalRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub index: usize,
    pub state: Vec<[f64; 2]>,
    pub contexts: Vec<TrialContext>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DetectorSummary {
    pub label: String,
    pub path: String,
    pub a_value: f64,
    pub partner_value: f64,
}

/// Per-context aggregate over all trials.
#[derive(Debug, Clone, Serialize)]
pub struct ContextResult {
    pub context: String,
    pub partner_eigenvalues: Vec<f64>,
    pub detectors: Vec<DetectorSummary>,
    pub all_consistent: bool,
    pub max_offdiag: f64,
    /// `max |Pr(P_α at t₁ | path α at t₂) − 1|` over defined conditionals.
    pub max_backward_conditional_deviation: f64,
    /// `max |Pr(path α at t₂ | P_α at t₁) − 1|` over defined conditionals.
    pub max_forward_conditional_deviation: f64,
    pub conditionals_evaluated: usize,
    /// `max |Pr_histories(D_j) − Pr_statevector(D_j)|`.
    pub max_oracle_deviation: f64,
    pub max_remainder: f64,
    pub max_probability_sum_error: f64,
    /// Distribution change under a second unitary completion.
    pub max_completion_deviation: f64,
    /// Deviation from the three-state model, when this context is `B` or `C`.
    pub figure1_crosscheck: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContextReport {
    pub seed: Option<u64>,
    pub state_provenance: String,
    pub state_count: usize,
    pub commutators: Vec<CommutatorEntry>,
    pub contexts: Vec<ContextResult>,
    /// `max |Pr_k(path α) − Pr_0(path α)|` across contexts; `None` unless every
    /// context is consistent for every state, `Some(0.0)` for one context.
    pub max_marginal_deviation: Option<f64>,
    /// `max |Pr_k(D1) − Pr_0(D1)|` from the statevector oracle.
    pub max_first_detector_deviation: f64,
    pub trials: Vec<TrialRecord>,
}

fn canonical_partner(a: &Operator, partner: &Operator) -> Option<Context> {
    let (ca, cb, cc) = canonical_observables();
    if a.dim() != 3 || a.distance(&ca).ok()? > tol::STRUCT {
        return None;
    }
    if partner.distance(&cb).ok()? <= tol::STRUCT {
        Some(Context::B)
    } else if partner.distance(&cc).ok()? <= tol::STRUCT {
        Some(Context::C)
    } else {
        None
    }
}

/// Runs the noncontextuality experiment for `A` against each partner, with
/// apparatus models from [`build_general`]. Partners are labelled
/// `partner_1, partner_2, …`. Every partner is checked for commutation with
/// `A` before anything is simulated.
pub fn noncontextuality_experiment(
    a: &Operator,
    partners: &[Operator],
    states: &StateSource,
) -> Result<ContextReport> {
    let labelled: Vec<(String, Operator)> = partners
        .iter()
        .enumerate()
        .map(|(k, p)| (format!("partner_{}", k + 1), p.clone()))
        .collect();
    noncontextuality_experiment_labelled(a, &labelled, states)
}

pub fn noncontextuality_experiment_labelled(
    a: &Operator,
    partners: &[(String, Operator)],
    states: &StateSource,
) -> Result<ContextReport> {
    if partners.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one partner is required".into(),
        ));
    }
    a.ensure_hermitian()?;
    let mut commutators = Vec::new();
    for (label, p) in partners {
        p.ensure_hermitian()?;
        let norm = a.commutator(p)?.frobenius_norm();
        if norm > tol::STRUCT {
            return Err(Error::NotCommuting { norm });
        }
        commutators.push(CommutatorEntry {
            name: format!("[A,{label}]"),
            norm,
        });
    }
    for i in 0..partners.len() {
        for j in i + 1..partners.len() {
            commutators.push(CommutatorEntry {
                name: format!("[{},{}]", partners[i].0, partners[j].0),
                norm: partners[i].1.commutator(&partners[j].1)?.frobenius_norm(),
            });
        }
    }
    let mut contexts = Vec::with_capacity(partners.len());
    for (label, p) in partners {
        let model = build_general(a, p)?.with_context_label(label.clone());
        let crosscheck = canonical_partner(a, p).map(build_figure1);
        contexts.push(PreparedContext {
            model,
            partner: p.clone(),
            crosscheck,
        });
    }
    run_contexts(contexts, commutators, states)
}

/// The experiment on the three-state apparatus itself.
pub fn canonical_experiment(contexts: &[Context], states: &StateSource) -> Result<ContextReport> {
    if contexts.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one context is required".into(),
        ));
    }
    let (a, b, c) = canonical_observables();
    let mut commutators = vec![
        CommutatorEntry {
            name: "[A,B]".into(),
            norm: a.commutator(&b)?.frobenius_norm(),
        },
        CommutatorEntry {
            name: "[A,C]".into(),
            norm: a.commutator(&c)?.frobenius_norm(),
        },
    ];
    commutators.push(CommutatorEntry {
        name: "[B,C]".into(),
        norm: b.commutator(&c)?.frobenius_norm(),
    });
    let prepared = contexts
        .iter()
        .map(|&ctx| {
            let partner = match ctx {
                Context::B => b.clone(),
                Context::C => c.clone(),
            };
            Ok(PreparedContext {
                model: build_figure1(ctx),
                crosscheck: Some(build_general(&a, &partner)?),
                partner,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    run_contexts(prepared, commutators, states)
}

struct PreparedContext {
    model: ApparatusModel,
    partner: Operator,
    crosscheck: Option<ApparatusModel>,
}

struct TrialOutcome {
    record: TrialContext,
    oracle_deviation: f64,
    sum_error: f64,
    completion_deviation: f64,
    crosscheck_deviation: Option<f64>,
}

fn run_trial(ctx: &PreparedContext, alternate: &ApparatusModel, psi: &Ket) -> Result<TrialOutcome> {
    let model = &ctx.model;
    let distribution = model.run_statevector(psi)?;
    let coarse = evaluate(&family_for_model(model, psi, Resolution::Coarse)?);
    let refined = evaluate(&family_for_model(model, psi, Resolution::Refined)?);
    let consistent = coarse.consistency.consistent && refined.consistency.consistent;
    let max_offdiag = coarse
        .consistency
        .max_offdiag
        .max(refined.consistency.max_offdiag);

    let mut path_marginals = Vec::new();
    let mut conditionals = Vec::new();
    let mut oracle_deviation = 0.0f64;
    let mut sum_error = 0.0f64;
    if let (Some(cp), Some(rp)) = (&coarse.probabilities, &refined.probabilities) {
        sum_error = (cp.sum() - 1.0).abs().max((rp.sum() - 1.0).abs());
        for (alpha, path) in model.paths().iter().enumerate() {
            let at_t1 = Event::new(T1, format!("P{}", alpha + 1));
            let at_t2 = Event::new(T2, path.label.clone());
            path_marginals.push((path.label.clone(), cp.marginal(&at_t2)?));
            for (given, query) in [(&at_t2, &at_t1), (&at_t1, &at_t2)] {
                let value = match cp.conditional(given, query) {
                    Ok(v) => Some(v),
                    Err(Error::ZeroProbabilityCondition { .. }) => None,
                    Err(e) => return Err(e),
                };
                conditionals.push(ConditionalRecord {
                    given: given.clone(),
                    query: query.clone(),
                    value,
                });
            }
        }
        for (label, p) in &distribution.entries {
            let h = rp.marginal(&Event::new(T2, label.clone()))?;
            oracle_deviation = oracle_deviation.max((h - p).abs());
        }
    }
    let completion_deviation = distribution.max_deviation(&alternate.run_statevector(psi)?);
    let crosscheck_deviation = match &ctx.crosscheck {
        Some(other) => Some(distribution.max_deviation(&other.run_statevector(psi)?)),
        None => None,
    };
    Ok(TrialOutcome {
        record: TrialContext {
            context: model.context_label().to_string(),
            consistent,
            max_offdiag,
            detector_distribution: distribution,
            path_marginals,
            conditionals,
        },
        oracle_deviation,
        sum_error,
        completion_deviation,
        crosscheck_deviation,
    })
}

fn run_contexts(
    contexts: Vec<PreparedContext>,
    commutators: Vec<CommutatorEntry>,
    source: &StateSource,
) -> Result<ContextReport> {
    let dim = contexts[0].model.particle_dim();
    let (states, provenance, seed) = source.materialize(dim)?;
    let alternates: Vec<ApparatusModel> = contexts
        .iter()
        .map(|c| c.model.with_completion(CompletionOrder::Reversed))
        .collect();

    let mut results: Vec<ContextResult> = contexts
        .iter()
        .map(|c| {
            Ok(ContextResult {
                context: c.model.context_label().to_string(),
                partner_eigenvalues: spectral_decompose(&c.partner)?.eigenvalues().to_vec(),
                detectors: c
                    .model
                    .detectors()
                    .iter()
                    .map(|d| DetectorSummary {
                        label: d.label.clone(),
                        path: c.model.paths()[d.path].label.clone(),
                        a_value: d.a_value,
                        partner_value: d.partner_value,
                    })
                    .collect(),
                all_consistent: true,
                max_offdiag: 0.0,
                max_backward_conditional_deviation: 0.0,
                max_forward_conditional_deviation: 0.0,
                conditionals_evaluated: 0,
                max_oracle_deviation: 0.0,
                max_remainder: 0.0,
                max_probability_sum_error: 0.0,
                max_completion_deviation: 0.0,
                figure1_crosscheck: c.crosscheck.as_ref().map(|_| 0.0),
            })
        })
        .collect::<Result<_>>()?;

    let mut trials = Vec::with_capacity(states.len());
    let mut max_marginal_deviation = 0.0f64;
    let mut max_first_detector_deviation = 0.0f64;
    let mut every_trial_consistent = true;
    for (index, psi) in states.iter().enumerate() {
        let mut per_context = Vec::with_capacity(contexts.len());
        for ((ctx, alt), res) in contexts.iter().zip(&alternates).zip(results.iter_mut()) {
            let out = run_trial(ctx, alt, psi)?;
            let rec = &out.record;
            res.all_consistent &= rec.consistent;
            res.max_offdiag = res.max_offdiag.max(rec.max_offdiag);
            for c in &rec.conditionals {
                if let Some(v) = c.value {
                    let dev = (v - 1.0).abs();
                    if c.given.time == T2 {
                        res.max_backward_conditional_deviation =
                            res.max_backward_conditional_deviation.max(dev);
                    } else {
                        res.max_forward_conditional_deviation =
                            res.max_forward_conditional_deviation.max(dev);
                    }
                    res.conditionals_evaluated += 1;
                }
            }
            res.max_oracle_deviation = res.max_oracle_deviation.max(out.oracle_deviation);
            res.max_remainder = res.max_remainder.max(rec.detector_distribution.remainder());
            res.max_probability_sum_error = res.max_probability_sum_error.max(out.sum_error);
            res.max_completion_deviation =
                res.max_completion_deviation.max(out.completion_deviation);
            if let (Some(acc), Some(d)) =
                (res.figure1_crosscheck.as_mut(), out.crosscheck_deviation)
            {
                *acc = acc.max(d);
            }
            every_trial_consistent &= rec.consistent;
            per_context.push(out.record);
        }
        let first = &per_context[0];
        for other in &per_context[1..] {
            for ((_, p0), (_, pk)) in first.path_marginals.iter().zip(&other.path_marginals) {
                max_marginal_deviation = max_marginal_deviation.max((p0 - pk).abs());
            }
            let d0 = first.detector_distribution.get("D1").unwrap_or(0.0);
            let dk = other.detector_distribution.get("D1").unwrap_or(0.0);
            max_first_detector_deviation = max_first_detector_deviation.max((d0 - dk).abs());
        }
        trials.push(TrialRecord {
            index,
            state: psi.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
            contexts: per_context,
        });
    }

    Ok(ContextReport {
        seed,
        state_provenance: provenance,
        state_count: states.len(),
        commutators,
        contexts: results,
        max_marginal_deviation: every_trial_consistent.then_some(max_marginal_deviation),
        max_first_detector_deviation,
        trials,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CommutatorPair {
    pub p: String,
    pub q: String,
    pub norm: f64,
}

/// Outcome of trying to combine `{P1, P2}` with `{Q1 = |ψ₁⟩⟨ψ₁|, Q2}` at `t₁`.
#[derive(Debug, Clone, Serialize)]
pub struct FrameworkClashReport {
    pub compatible: bool,
    pub commutator_norms: Vec<CommutatorPair>,
    pub max_commutator: f64,
    /// Labels of the common refinement when the decompositions are compatible.
    pub joint_framework: Option<Vec<String>>,
    /// Why no joint family was formed, when incompatible.
    pub refusal: Option<String>,
    #[serde(skip)]
    pub refusal_error: Option<Error>,
}

/// Compares `{P1, P2}` with `{Q1, Q2}` built from `ψ₁ = ψ₀` (the evolution up
/// to `t₁` is trivial). Incompatible decompositions are never merged.
pub fn framework_clash_demo(psi: &Ket) -> Result<FrameworkClashReport> {
    if psi.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: psi.dim(),
        });
    }
    psi.ensure_normalized()?;
    let (a, _, _) = canonical_observables();
    let p = spectral_decompose(&a)?.to_decomposition();
    let q = ProjectiveDecomposition::binary("Q1", Operator::dyad(psi), "Q2")?;
    let mut commutator_norms = Vec::new();
    for (lp, pp) in p.labels().iter().zip(p.projectors()) {
        for (lq, qq) in q.labels().iter().zip(q.projectors()) {
            commutator_norms.push(CommutatorPair {
                p: lp.clone(),
                q: lq.clone(),
                norm: pp.commutator(qq)?.frobenius_norm(),
            });
        }
    }
    let max_commutator = max_cross_commutator(&p, &q)?;
    let (joint_framework, refusal_error) = match p.common_refinement(&q) {
        Ok(r) => (Some(r.labels().to_vec()), None),
        Err(e @ Error::IncompatibleDecompositions { .. }) => (None, Some(e)),
        Err(e) => return Err(e),
    };
    Ok(FrameworkClashReport {
        compatible: refusal_error.is_none(),
        commutator_norms,
        max_commutator,
        joint_framework,
        refusal: refusal_error.as_ref().map(ToString::to_string),
        refusal_error,
    })
}

/// Attempts to use `{P1, P2, Q1, Q2}` as a single decomposition at one time.
/// Always fails: the union is not orthogonal and sums to `2I`.
pub fn mixed_decomposition(psi: &Ket) -> Result<ProjectiveDecomposition> {
    let (a, _, _) = canonical_observables();
    let p = spectral_decompose(&a)?.to_decomposition();
    let q1 = Operator::dyad(psi);
    let q2 = Operator::identity(psi.dim()).sub(&q1)?;
    let mut labels = p.labels().to_vec();
    labels.extend(["Q1".to_string(), "Q2".to_string()]);
    let mut projectors = p.projectors().to_vec();
    projectors.extend([q1, q2]);
    ProjectiveDecomposition::new(labels, projectors)
}

/// `|ψ₀⟩ ⊗` helper for callers holding complex amplitudes.
pub fn ket_from_pairs(pairs: &[[f64; 2]]) -> Result<Ket> {
    Ket::new(pairs.iter().map(|[re, im]| C64::new(*re, *im)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_entries() {
        let (a, b, c) = canonical_observables();
        assert_eq!(a[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(b[(0, 0)], C64::new(0.5, 0.0));
        assert_eq!(c[(1, 2)], C64::new(1.0, 0.0));
        assert_eq!(c[(2, 1)], C64::new(1.0, 0.0));
        assert_eq!(a.trace(), C64::new(-1.0, 0.0));
    }

    #[test]
    fn context_unitaries() {
        assert_eq!(canonical_context_unitary(Context::B), Operator::identity(3));
        let u = canonical_context_unitary(Context::C);
        assert!(u.unitarity_residual() <= 1e-12);
        let out = u.apply(&Ket::basis(3, 1)).unwrap();
        assert!(out.distance(&named_state("c2").unwrap()).unwrap() < 1e-15);
        // U_C† U_C restricted to span{|2⟩, |3⟩}.
        let prod = u.dagger().compose(&u).unwrap();
        for i in 1..3 {
            for j in 1..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - C64::new(want, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn context_parsing() {
        assert_eq!("B".parse::<Context>().unwrap(), Context::B);
        assert_eq!("c".parse::<Context>().unwrap(), Context::C);
        assert!("Q".parse::<Context>().is_err());
    }

    #[test]
    fn canonical_family_structure() {
        let f = canonical_family(Context::B, &named_state("uniform").unwrap()).unwrap();
        let outcomes: Vec<Vec<String>> = f.histories().iter().map(|h| f.labels_of(h)).collect();
        let want = [
            ["P1", "D1"],
            ["P1", "M1"],
            ["P1", "R"],
            ["P2", "D1"],
            ["P2", "M1"],
            ["P2", "R"],
        ];
        assert_eq!(outcomes.len(), want.len());
        for (o, w) in outcomes.iter().zip(want) {
            assert_eq!(o, &w);
        }
        assert_eq!(f.dim(), 24);
    }

    #[test]
    fn single_context_deviation_is_zero() {
        let (a, b, _) = canonical_observables();
        let r = noncontextuality_experiment(&a, &[b], &StateSource::Random { count: 5, seed: 1 })
            .unwrap();
        assert_eq!(r.max_marginal_deviation, Some(0.0));
        assert_eq!(r.seed, Some(1));
    }

    #[test]
    fn noncommuting_partner_fails_before_simulation() {
        let (_, b, c) = canonical_observables();
        let err = noncontextuality_experiment(&b, &[c], &StateSource::Random { count: 1, seed: 0 })
            .unwrap_err();
        assert!(matches!(err, Error::NotCommuting { .. }));
    }

    #[test]
    fn eigenstate_e1_fires_d1_in_both_contexts() {
        let r = canonical_experiment(
            &[Context::B, Context::C],
            &StateSource::Explicit {
                states: vec![named_state("e1").unwrap()],
                provenance: "e1".into(),
            },
        )
        .unwrap();
        for c in &r.trials[0].contexts {
            assert!((c.detector_distribution.get("D1").unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn framework_clash_cases() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let r = framework_clash_demo(&Ket::from_real(&[s, s, 0.0]).unwrap()).unwrap();
        assert!(!r.compatible);
        assert!(r.max_commutator > 0.1);
        assert!(r.joint_framework.is_none());
        assert!(matches!(
            r.refusal_error,
            Some(Error::IncompatibleDecompositions { .. })
        ));

        let r = framework_clash_demo(&named_state("e1").unwrap()).unwrap();
        assert!(r.compatible);
        let r = framework_clash_demo(&named_state("c2").unwrap()).unwrap();
        assert!(r.compatible, "max commutator {}", r.max_commutator);
    }

    #[test]
    fn mixed_decomposition_is_refused() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let err = mixed_decomposition(&Ket::from_real(&[s, s, 0.0]).unwrap()).unwrap_err();
        assert!(matches!(err, Error::InvalidDecomposition { .. }));
    }
}
