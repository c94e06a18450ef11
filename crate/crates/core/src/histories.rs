//! History families, the decoherence functional, and the probability
//! calculus for consistent families.
//!
//! A family is an initial pure state `|Ψ₀⟩` at `t₀` followed by one projective
//! decomposition per later time, with a unitary propagator for each interval.
//! The chain vector of a history `(o₁, …, oₙ)` is
//! `P⁽ⁿ⁾_{oₙ} Uₙ ⋯ P⁽¹⁾_{o₁} U₁ |Ψ₀⟩`, and the decoherence matrix is the Gram
//! matrix of the chain vectors.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{Ket, Operator};
use crate::spectral::ProjectiveDecomposition;
use crate::tol;

#[derive(Debug, Clone)]
pub struct HistoryFamily {
    initial_state: Ket,
    times: Vec<String>,
    propagators: Vec<Operator>,
    decompositions: Vec<ProjectiveDecomposition>,
}

impl HistoryFamily {
    /// `times` has one label for `t₀` plus one per decomposition;
    /// `propagators[k]` evolves from `times[k]` to `times[k + 1]`.
    pub fn new(
        initial_state: Ket,
        times: Vec<String>,
        propagators: Vec<Operator>,
        decompositions: Vec<ProjectiveDecomposition>,
    ) -> Result<Self> {
        if decompositions.is_empty() {
            return Err(Error::InvalidArgument(
                "a family needs at least one event time after t0".into(),
            ));
        }
        if times.len() != decompositions.len() + 1 {
            return Err(Error::InvalidArgument(format!(
                "expected {} time labels (t0 plus one per decomposition), got {}",
                decompositions.len() + 1,
                times.len()
            )));
        }
        if propagators.len() != decompositions.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} propagators, got {}",
                decompositions.len(),
                propagators.len()
            )));
        }
        for (i, t) in times.iter().enumerate() {
            if t.is_empty() || times[..i].contains(t) {
                return Err(Error::InvalidArgument(format!(
                    "time labels must be distinct and non-empty (offending: {t:?})"
                )));
            }
        }
        let dim = initial_state.dim();
        initial_state.ensure_normalized()?;
        for u in &propagators {
            if u.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: u.dim(),
                });
            }
            u.ensure_unitary()?;
        }
        for d in &decompositions {
            if d.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: d.dim(),
                });
            }
        }
        Ok(HistoryFamily {
            initial_state,
            times,
            propagators,
            decompositions,
        })
    }

    pub fn initial_state(&self) -> &Ket {
        &self.initial_state
    }

    pub fn dim(&self) -> usize {
        self.initial_state.dim()
    }

    /// All time labels including `t₀`.
    pub fn times(&self) -> &[String] {
        &self.times
    }

    /// Labels of the times that carry a decomposition.
    pub fn event_times(&self) -> &[String] {
        &self.times[1..]
    }

    pub fn propagators(&self) -> &[Operator] {
        &self.propagators
    }

    pub fn decompositions(&self) -> &[ProjectiveDecomposition] {
        &self.decompositions
    }

    /// Number of histories in the family (product of decomposition sizes).
    pub fn history_count(&self) -> usize {
        self.decompositions.iter().map(|d| d.len()).product()
    }

    /// All histories as outcome-index tuples, first event time varying slowest.
    pub fn histories(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for d in &self.decompositions {
            out = out
                .into_iter()
                .flat_map(|h| {
                    (0..d.len()).map(move |i| {
                        let mut h = h.clone();
                        h.push(i);
                        h
                    })
                })
                .collect();
        }
        out
    }

    pub fn labels_of(&self, history: &[usize]) -> Vec<String> {
        history
            .iter()
            .zip(&self.decompositions)
            .map(|(&i, d)| d.labels()[i].clone())
            .collect()
    }

    fn resolve(&self, outcomes: &[&str]) -> Result<Vec<usize>> {
        if outcomes.len() != self.decompositions.len() {
            return Err(Error::InvalidArgument(format!(
                "history needs {} outcomes, got {}",
                self.decompositions.len(),
                outcomes.len()
            )));
        }
        outcomes
            .iter()
            .zip(&self.decompositions)
            .zip(self.event_times())
            .map(|((label, d), t)| {
                d.index_of(label).ok_or_else(|| Error::UnknownLabel {
                    time: t.clone(),
                    label: label.to_string(),
                })
            })
            .collect()
    }

    fn chain_vector_at(&self, history: &[usize]) -> Ket {
        let mut v = self.initial_state.clone();
        for ((u, d), &i) in self
            .propagators
            .iter()
            .zip(&self.decompositions)
            .zip(history)
        {
            v = u.apply(&v).expect("validated dims");
            v = d.projectors()[i].apply(&v).expect("validated dims");
        }
        v
    }

    /// Unnormalized chain vector of the history with the given outcome labels.
    pub fn chain_vector(&self, outcomes: &[&str]) -> Result<Ket> {
        Ok(self.chain_vector_at(&self.resolve(outcomes)?))
    }

    /// Chain vectors of every history, in [`HistoryFamily::histories`] order.
    /// Prefixes are shared, so each propagator/projector product is evaluated once per branch.
    pub fn chain_vectors(&self) -> Vec<Ket> {
        let mut layer = vec![self.initial_state.clone()];
        for (u, d) in self.propagators.iter().zip(&self.decompositions) {
            layer = layer
                .iter()
                .flat_map(|v| {
                    let evolved = u.apply(v).expect("validated dims");
                    d.projectors()
                        .iter()
                        .map(|p| p.apply(&evolved).expect("validated dims"))
                        .collect::<Vec<_>>()
                })
                .collect();
        }
        layer
    }

    fn time_index(&self, time: &str) -> Result<usize> {
        self.event_times()
            .iter()
            .position(|t| t == time)
            .ok_or_else(|| Error::UnknownTime(time.to_string()))
    }

    fn resolve_event(&self, event: &Event) -> Result<(usize, usize)> {
        let t = self.time_index(&event.time)?;
        let i = self.decompositions[t]
            .index_of(&event.label)
            .ok_or_else(|| Error::UnknownLabel {
                time: event.time.clone(),
                label: event.label.clone(),
            })?;
        Ok((t, i))
    }
}

/// One event: outcome `label` of the decomposition at `time`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Event {
    pub time: String,
    pub label: String,
}

impl Event {
    pub fn new(time: impl Into<String>, label: impl Into<String>) -> Self {
        Event {
            time: time.into(),
            label: label.into(),
        }
    }
}

impl std::fmt::Display for Event {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}@{}", self.label, self.time)
    }
}

/// `D(o, o') = ⟨chain(o)|chain(o')⟩` over all histories of a family.
#[derive(Debug, Clone)]
pub struct DecoherenceMatrix {
    entries: Operator,
    outcomes: Vec<Vec<String>>,
}

impl DecoherenceMatrix {
    pub fn entries(&self) -> &Operator {
        &self.entries
    }

    /// Label tuple of each row/column.
    pub fn outcomes(&self) -> &[Vec<String>] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn index_of(&self, outcome: &[&str]) -> Option<usize> {
        self.outcomes
            .iter()
            .position(|o| o.iter().map(String::as_str).eq(outcome.iter().copied()))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.entries[(i, i)].re).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    /// `max_{o ≠ o'} |D(o, o')|`.
    pub fn max_offdiag(&self) -> f64 {
        let n = self.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    worst = worst.max(self.entries[(i, j)].norm());
                }
            }
        }
        worst
    }
}

pub fn decoherence_matrix(f: &HistoryFamily) -> DecoherenceMatrix {
    let chains = f.chain_vectors();
    let n = chains.len();
    let mut entries = Vec::with_capacity(n * n);
    for a in &chains {
        for b in &chains {
            entries.push(a.inner(b).expect("same dim"));
        }
    }
    DecoherenceMatrix {
        entries: Operator::new(n, entries).expect("n > 0"),
        outcomes: f.histories().iter().map(|h| f.labels_of(h)).collect(),
    }
}

/// Medium-decoherence verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Consistency {
    pub consistent: bool,
    pub max_offdiag: f64,
}

impl Consistency {
    fn from_matrix(m: &DecoherenceMatrix) -> Self {
        let max_offdiag = m.max_offdiag();
        Consistency {
            consistent: max_offdiag <= tol::CONSISTENCY,
            max_offdiag,
        }
    }
}

/// Consistent iff every off-diagonal entry (real and imaginary part) of the
/// decoherence matrix vanishes within [`tol::CONSISTENCY`].
pub fn is_consistent(f: &HistoryFamily) -> Consistency {
    Consistency::from_matrix(&decoherence_matrix(f))
}

/// Probabilities of the histories of a consistent family.
#[derive(Debug, Clone, Serialize)]
pub struct Probabilities {
    times: Vec<String>,
    outcomes: Vec<Vec<String>>,
    values: Vec<f64>,
}

impl Probabilities {
    fn from_matrix(times: &[String], m: &DecoherenceMatrix) -> Self {
        let trace = m.trace();
        Probabilities {
            times: times.to_vec(),
            outcomes: m.outcomes.clone(),
            values: m.diagonal().iter().map(|d| (d / trace).max(0.0)).collect(),
        }
    }

    /// Event-time labels, one per outcome slot.
    pub fn times(&self) -> &[String] {
        &self.times
    }

    pub fn outcomes(&self) -> &[Vec<String>] {
        &self.outcomes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[String], f64)> {
        self.outcomes
            .iter()
            .map(Vec::as_slice)
            .zip(self.values.iter().copied())
    }

    pub fn get(&self, outcome: &[&str]) -> Option<f64> {
        self.outcomes
            .iter()
            .position(|o| o.iter().map(String::as_str).eq(outcome.iter().copied()))
            .map(|i| self.values[i])
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    fn slot(&self, event: &Event) -> Result<usize> {
        let t = self
            .times
            .iter()
            .position(|t| *t == event.time)
            .ok_or_else(|| Error::UnknownTime(event.time.clone()))?;
        if !self.outcomes.iter().any(|o| o[t] == event.label) {
            return Err(Error::UnknownLabel {
                time: event.time.clone(),
                label: event.label.clone(),
            });
        }
        Ok(t)
    }

    /// Total probability of histories containing every event in `events`.
    pub fn joint(&self, events: &[&Event]) -> Result<f64> {
        let slots: Vec<usize> = events.iter().map(|e| self.slot(e)).collect::<Result<_>>()?;
        Ok(self
            .iter()
            .filter(|(o, _)| slots.iter().zip(events).all(|(&t, e)| o[t] == e.label))
            .map(|(_, p)| p)
            .sum())
    }

    pub fn marginal(&self, event: &Event) -> Result<f64> {
        self.joint(&[event])
    }

    /// `Pr(query | given)`; errors when `Pr(given) ≤ τ_prob`.
    pub fn conditional(&self, given: &Event, query: &Event) -> Result<f64> {
        let denominator = self.marginal(given)?;
        if denominator <= tol::PROBABILITY {
            return Err(Error::ZeroProbabilityCondition {
                event: given.to_string(),
                probability: denominator,
            });
        }
        Ok(self.joint(&[given, query])? / denominator)
    }
}

/// History probabilities `D(o, o)`; refused for inconsistent families.
pub fn probabilities(f: &HistoryFamily) -> Result<Probabilities> {
    evaluate(f).into_probabilities()
}

pub fn conditional_probability(f: &HistoryFamily, given: &Event, query: &Event) -> Result<f64> {
    f.resolve_event(given)?;
    f.resolve_event(query)?;
    probabilities(f)?.conditional(given, query)
}

/// Everything computed from one decoherence matrix.
#[derive(Debug, Clone)]
pub struct FamilyReport {
    pub matrix: DecoherenceMatrix,
    pub consistency: Consistency,
    /// Present only for consistent families.
    pub probabilities: Option<Probabilities>,
}

impl FamilyReport {
    pub fn into_probabilities(self) -> Result<Probabilities> {
        self.probabilities.ok_or(Error::Inconsistent {
            max_offdiag: self.consistency.max_offdiag,
        })
    }
}

pub fn evaluate(f: &HistoryFamily) -> FamilyReport {
    let matrix = decoherence_matrix(f);
    let consistency = Consistency::from_matrix(&matrix);
    let probabilities = consistency
        .consistent
        .then(|| Probabilities::from_matrix(f.event_times(), &matrix));
    FamilyReport {
        matrix,
        consistency,
        probabilities,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;

    fn qubit_family(psi: Ket, decs: Vec<ProjectiveDecomposition>) -> HistoryFamily {
        let n = decs.len();
        let times = (0..=n).map(|k| format!("t{k}")).collect();
        HistoryFamily::new(psi, times, vec![Operator::identity(2); n], decs).unwrap()
    }

    fn z_basis() -> ProjectiveDecomposition {
        ProjectiveDecomposition::binary("0", Operator::dyad(&Ket::basis(2, 0)), "1").unwrap()
    }

    fn x_basis() -> ProjectiveDecomposition {
        let plus = Ket::from_real(&[1.0, 1.0]).unwrap().normalized().unwrap();
        ProjectiveDecomposition::binary("+", Operator::dyad(&plus), "-").unwrap()
    }

    #[test]
    fn single_time_chain_absorbs_eigenvector() {
        let f = HistoryFamily::new(
            Ket::basis(3, 0),
            vec!["t0".into(), "t1".into()],
            vec![Operator::identity(3)],
            vec![ProjectiveDecomposition::binary(
                "first",
                Operator::dyad(&Ket::basis(3, 0)),
                "rest",
            )
            .unwrap()],
        )
        .unwrap();
        assert_eq!(f.chain_vector(&["first"]).unwrap(), Ket::basis(3, 0));
        assert!(matches!(
            f.chain_vector(&["nope"]),
            Err(Error::UnknownLabel { .. })
        ));
    }

    #[test]
    fn single_time_gives_born_rule() {
        let psi = Ket::new(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap();
        let f = qubit_family(psi, vec![z_basis()]);
        let m = decoherence_matrix(&f);
        let d = m.diagonal();
        assert!((d[0] - 0.36).abs() < 1e-15);
        assert!((d[1] - 0.64).abs() < 1e-15);
        assert_eq!(m.max_offdiag(), 0.0);
        assert!(is_consistent(&f).consistent);
    }

    #[test]
    fn two_time_family_x_then_z_from_zero_is_inconsistent() {
        // Hand computation: chain(+,0) = chain(-,0) = |0>/2,
        // chain(+,1) = |1>/2, chain(-,1) = -|1>/2.
        let f = qubit_family(Ket::basis(2, 0), vec![x_basis(), z_basis()]);
        let m = decoherence_matrix(&f);
        let i = |o: [&str; 2]| m.index_of(&o).unwrap();
        let d = |a, b| m.entries()[(i(a), i(b))];
        assert!((d(["+", "0"], ["-", "0"]) - C64::new(0.25, 0.0)).norm() < 1e-15);
        assert!((d(["+", "1"], ["-", "1"]) - C64::new(-0.25, 0.0)).norm() < 1e-15);
        assert!((d(["+", "0"], ["+", "1"])).norm() < 1e-15);
        assert!(!is_consistent(&f).consistent);
    }

    #[test]
    fn two_time_family_z_then_x_from_zero_is_consistent() {
        // Only chains starting with outcome 0 survive; they end in the
        // orthogonal ranges of |+><+| and |-><-|.
        let f = qubit_family(Ket::basis(2, 0), vec![z_basis(), x_basis()]);
        let c = is_consistent(&f);
        assert!(c.consistent, "max offdiag {}", c.max_offdiag);
        let p = probabilities(&f).unwrap();
        assert!((p.get(&["0", "+"]).unwrap() - 0.5).abs() < 1e-15);
        assert!((p.get(&["0", "-"]).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(p.get(&["1", "+"]).unwrap(), 0.0);
    }

    #[test]
    fn inconsistent_family_refuses_probabilities() {
        let f = qubit_family(Ket::basis(2, 0), vec![x_basis(), z_basis()]);
        match probabilities(&f) {
            Err(Error::Inconsistent { max_offdiag }) => assert!((max_offdiag - 0.25).abs() < 1e-12),
            other => panic!("expected Inconsistent, got {other:?}"),
        }
        let given = Event::new("t2", "0");
        let query = Event::new("t1", "+");
        assert!(matches!(
            conditional_probability(&f, &given, &query),
            Err(Error::Inconsistent { .. })
        ));
    }

    #[test]
    fn zero_probability_condition_is_an_error() {
        let f = qubit_family(Ket::basis(2, 0), vec![z_basis()]);
        let err = conditional_probability(&f, &Event::new("t1", "1"), &Event::new("t1", "0"))
            .unwrap_err();
        assert!(matches!(err, Error::ZeroProbabilityCondition { .. }));
        assert!(matches!(
            conditional_probability(&f, &Event::new("t9", "0"), &Event::new("t1", "0")),
            Err(Error::UnknownTime(_))
        ));
    }

    #[test]
    fn family_validation() {
        let psi = Ket::basis(2, 0);
        let t = |n: usize| (0..n).map(|k| format!("t{k}")).collect::<Vec<_>>();
        assert!(HistoryFamily::new(psi.clone(), t(1), vec![], vec![]).is_err());
        assert!(HistoryFamily::new(
            psi.clone(),
            t(3),
            vec![Operator::identity(2)],
            vec![z_basis()]
        )
        .is_err());
        let dup = vec!["a".to_string(), "a".to_string()];
        assert!(HistoryFamily::new(
            psi.clone(),
            dup,
            vec![Operator::identity(2)],
            vec![z_basis()]
        )
        .is_err());
        let bad_u = Operator::from_real_diagonal(&[1.0, 2.0]);
        assert!(matches!(
            HistoryFamily::new(psi.clone(), t(2), vec![bad_u], vec![z_basis()]),
            Err(Error::NotUnitary { .. })
        ));
        let unnormalized = Ket::from_real(&[1.0, 1.0]).unwrap();
        assert!(matches!(
            HistoryFamily::new(
                unnormalized,
                t(2),
                vec![Operator::identity(2)],
                vec![z_basis()]
            ),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn eigenvector_of_every_chain_concentrates_weight() {
        let f = qubit_family(Ket::basis(2, 1), vec![z_basis(), z_basis()]);
        let m = decoherence_matrix(&f);
        assert_eq!(m.diagonal(), vec![0.0, 0.0, 0.0, 1.0]);
        assert!((m.trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn chain_vectors_match_direct_evaluation() {
        let psi = Ket::new(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap();
        let f = qubit_family(psi, vec![x_basis(), z_basis(), x_basis()]);
        let all = f.chain_vectors();
        for (h, v) in f.histories().iter().zip(&all) {
            assert_eq!(&f.chain_vector_at(h), v);
        }
        assert_eq!(all.len(), f.history_count());
    }
}
