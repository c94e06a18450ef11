//! Unitary models of a measuring apparatus for an observable `A` together
//! with a commuting partner.
//!
//! The composite space is `particle ⊗ M ⊗ D`:
//!
//! - `M` holds the nondestructive path records (`m_ready` = untriggered),
//! - `D` holds the final detectors, index 0 being "ready".
//!
//! Only the ready subspace `particle ⊗ |m_ready⟩ ⊗ |ready⟩` is ever populated,
//! so the total unitary is specified there and completed elsewhere by
//! [`complete_isometry_with`]. Outcome probabilities do not depend on the
//! completion.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    complete_isometry, complete_isometry_with, CompletionOrder, Ket, Operator, PartialIsometryMap,
};
use crate::scenarios::{canonical_context_unitary, canonical_observables, Context};
use crate::spectral::{
    joint_eigenbasis, spectral_decompose, JointEigenvector, ProjectiveDecomposition,
};

/// Label of the never-reached remainder outcome.
pub const REMAINDER: &str = "R";

/// A final detector and the joint eigenvalue pair it reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Detector {
    pub label: String,
    /// Index in the `D` register.
    pub index: usize,
    /// Index into [`ApparatusModel::paths`].
    pub path: usize,
    pub a_value: f64,
    pub partner_value: f64,
}

/// One trajectory selected by the first splitter: an eigenspace of `A`.
#[derive(Debug, Clone)]
pub struct Path {
    /// Outcome label of the coarse (path-level) decomposition at `t₂`.
    pub label: String,
    pub a_value: f64,
    /// State of the `M` register once the particle has traversed this path.
    pub m_state: usize,
    /// `P_α` on the particle space.
    pub particle_projector: Operator,
    /// Indices into [`ApparatusModel::detectors`].
    pub detectors: Vec<usize>,
}

/// Observable pair plus the per-path unitaries that rotate the partner's
/// eigenbasis, within each eigenspace of `A`, onto a contiguous block of
/// standard basis vectors.
#[derive(Debug, Clone)]
pub struct ContextSpec {
    pub a: Operator,
    pub partner: Operator,
    pub joint_basis: Vec<JointEigenvector>,
    pub per_path_unitaries: Vec<Operator>,
}

impl ContextSpec {
    pub fn new(a: &Operator, partner: &Operator) -> Result<Self> {
        let joint_basis = joint_eigenbasis(a, partner)?;
        let dim = a.dim();
        let blocks = joint_basis.last().map_or(0, |j| j.block + 1);
        let mut per_path_unitaries = Vec::with_capacity(blocks);
        for block in 0..blocks {
            let (domain, image): (Vec<Ket>, Vec<Ket>) = joint_basis
                .iter()
                .enumerate()
                .filter(|(_, j)| j.block == block)
                .map(|(k, j)| (j.vector.clone(), Ket::basis(dim, k)))
                .unzip();
            let map = PartialIsometryMap::new(dim, domain, image)?;
            per_path_unitaries.push(complete_isometry(&map));
        }
        Ok(ContextSpec {
            a: a.clone(),
            partner: partner.clone(),
            joint_basis,
            per_path_unitaries,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ApparatusModel {
    particle_dim: usize,
    m_dim: usize,
    d_dim: usize,
    m_ready: usize,
    ready_map: PartialIsometryMap,
    total_unitary: Operator,
    paths: Vec<Path>,
    detectors: Vec<Detector>,
    per_path_unitaries: Vec<Operator>,
    context_label: String,
}

const D_READY: usize = 0;

impl ApparatusModel {
    pub fn particle_dim(&self) -> usize {
        self.particle_dim
    }

    pub fn m_dim(&self) -> usize {
        self.m_dim
    }

    pub fn d_dim(&self) -> usize {
        self.d_dim
    }

    pub fn composite_dim(&self) -> usize {
        self.particle_dim * self.m_dim * self.d_dim
    }

    pub fn pointer_dim(&self) -> usize {
        self.m_dim * self.d_dim
    }

    /// The `t₁ → t₂` propagator.
    pub fn total_unitary(&self) -> &Operator {
        &self.total_unitary
    }

    pub fn ready_map(&self) -> &PartialIsometryMap {
        &self.ready_map
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn detectors(&self) -> &[Detector] {
        &self.detectors
    }

    pub fn per_path_unitaries(&self) -> &[Operator] {
        &self.per_path_unitaries
    }

    pub fn context_label(&self) -> &str {
        &self.context_label
    }

    pub fn with_context_label(mut self, label: impl Into<String>) -> Self {
        self.context_label = label.into();
        self
    }

    /// Same ready-subspace action, different unitary completion.
    pub fn with_completion(&self, order: CompletionOrder) -> Self {
        let mut out = self.clone();
        out.total_unitary = complete_isometry_with(&self.ready_map, order);
        out
    }

    /// The pointer state `|m_ready⟩ ⊗ |ready⟩`.
    pub fn pointer_ready(&self) -> Ket {
        Ket::basis(self.m_dim, self.m_ready).tensor(&Ket::basis(self.d_dim, D_READY))
    }

    /// `ψ ⊗ |m_ready⟩ ⊗ |ready⟩`.
    pub fn prepare(&self, psi: &Ket) -> Result<Ket> {
        if psi.dim() != self.particle_dim {
            return Err(Error::DimensionMismatch {
                expected: self.particle_dim,
                found: psi.dim(),
            });
        }
        Ok(psi.tensor(&self.pointer_ready()))
    }

    fn pointer_projector(&self, m_state: usize, d_states: &[usize]) -> Operator {
        let m = Operator::dyad(&Ket::basis(self.m_dim, m_state));
        let d = d_states
            .iter()
            .fold(Operator::zeros(self.d_dim), |acc, &k| {
                acc.add(&Operator::dyad(&Ket::basis(self.d_dim, k)))
                    .expect("same dim")
            });
        Operator::identity(self.particle_dim).tensor(&m.tensor(&d))
    }

    fn with_remainder(
        &self,
        mut labels: Vec<String>,
        mut projectors: Vec<Operator>,
    ) -> ProjectiveDecomposition {
        let remainder = projectors
            .iter()
            .try_fold(Operator::identity(self.composite_dim()), |acc, p| {
                acc.sub(p)
            })
            .expect("same dim");
        labels.push(REMAINDER.to_string());
        projectors.push(remainder);
        ProjectiveDecomposition::new(labels, projectors)
            .expect("pointer projectors are orthogonal by construction")
    }

    /// Path-level outcomes at `t₂` (for the three-state model: `D1`, `M1`),
    /// completed by the remainder `R`.
    pub fn outcome_projectors(&self) -> ProjectiveDecomposition {
        let (labels, projectors) = self
            .paths
            .iter()
            .map(|p| {
                let ds: Vec<usize> = p
                    .detectors
                    .iter()
                    .map(|&k| self.detectors[k].index)
                    .collect();
                (p.label.clone(), self.pointer_projector(p.m_state, &ds))
            })
            .unzip();
        self.with_remainder(labels, projectors)
    }

    /// One outcome per final detector, completed by the remainder `R`.
    pub fn refined_outcome_projectors(&self) -> ProjectiveDecomposition {
        let (labels, projectors) = self
            .detectors
            .iter()
            .map(|d| {
                let m = self.paths[d.path].m_state;
                (d.label.clone(), self.pointer_projector(m, &[d.index]))
            })
            .unzip();
        self.with_remainder(labels, projectors)
    }

    /// `{P_α}` on the particle space, labelled `P1, P2, …` in path order.
    pub fn particle_decomposition(&self) -> ProjectiveDecomposition {
        ProjectiveDecomposition::new(
            (1..=self.paths.len()).map(|k| format!("P{k}")).collect(),
            self.paths
                .iter()
                .map(|p| p.particle_projector.clone())
                .collect(),
        )
        .expect("eigenprojectors form a decomposition")
    }

    /// Born-rule detector statistics by direct evolution of
    /// `ψ ⊗ |m_ready⟩ ⊗ |ready⟩`. Amplitudes are binned by register index,
    /// without going through any projector matrices.
    pub fn run_statevector(&self, psi: &Ket) -> Result<DetectorDistribution> {
        psi.ensure_normalized()?;
        let out = self.total_unitary.apply(&self.prepare(psi)?)?;
        let mut weights = vec![0.0; self.detectors.len() + 1];
        for (idx, amp) in out.amplitudes().iter().enumerate() {
            let m = (idx / self.d_dim) % self.m_dim;
            let d = idx % self.d_dim;
            let slot = self
                .detectors
                .iter()
                .position(|det| det.index == d && self.paths[det.path].m_state == m)
                .unwrap_or(self.detectors.len());
            weights[slot] += amp.norm_sqr();
        }
        let mut entries: Vec<(String, f64)> = self
            .detectors
            .iter()
            .map(|d| d.label.clone())
            .zip(weights.iter().copied())
            .collect();
        entries.push((REMAINDER.to_string(), weights[self.detectors.len()]));
        Ok(DetectorDistribution { entries })
    }

    /// Coarse path probabilities from a detector distribution.
    pub fn path_marginals(&self, dist: &DetectorDistribution) -> Vec<(String, f64)> {
        self.paths
            .iter()
            .map(|p| {
                let w = p
                    .detectors
                    .iter()
                    .map(|&k| dist.get(&self.detectors[k].label).unwrap_or(0.0))
                    .sum();
                (p.label.clone(), w)
            })
            .collect()
    }

    /// Largest remainder weight over the particle basis states.
    pub fn ready_subspace_defect(&self) -> Result<f64> {
        (0..self.particle_dim).try_fold(0.0f64, |m, k| {
            let dist = self.run_statevector(&Ket::basis(self.particle_dim, k))?;
            Ok(m.max(dist.remainder()))
        })
    }
}

/// Probability of each final detector plus the remainder `R`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectorDistribution {
    pub entries: Vec<(String, f64)>,
}

impl DetectorDistribution {
    pub fn get(&self, label: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, p)| *p)
    }

    pub fn remainder(&self) -> f64 {
        self.get(REMAINDER).unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }

    /// `max_label |self(label) − other(label)|` over the union of labels.
    pub fn max_deviation(&self, other: &DetectorDistribution) -> f64 {
        self.entries
            .iter()
            .chain(&other.entries)
            .map(|(l, _)| (self.get(l).unwrap_or(0.0) - other.get(l).unwrap_or(0.0)).abs())
            .fold(0.0, f64::max)
    }
}

/// The three-state apparatus: splitter `V`, nondestructive detector `M1` on
/// the lower path, context unitary `U` (`U_B = I` or `U_C`), splitter `W`,
/// detectors `D1`–`D3`.
///
/// Registers: `M = {m0, m1}`, `D = {r, d1, d2, d3}`. Ready-subspace action:
/// `|1,m0,r⟩ ↦ |1,m0,d1⟩` and, for `k ∈ {2,3}`,
/// `|k,m0,r⟩ ↦ Σ_j u_{jk} |j,m1,d_j⟩`.
pub fn build_figure1(context: Context) -> ApparatusModel {
    build_figure1_with(context, CompletionOrder::Canonical)
}

pub fn build_figure1_with(context: Context, order: CompletionOrder) -> ApparatusModel {
    const P: usize = 3;
    const M: usize = 2;
    const D: usize = 4;
    let (_, b, c) = canonical_observables();
    let partner = match context {
        Context::B => b,
        Context::C => c,
    };
    let u = canonical_context_unitary(context);
    let basis = |p: usize, m: usize, d: usize| {
        Ket::basis(P, p)
            .tensor(&Ket::basis(M, m))
            .tensor(&Ket::basis(D, d))
    };

    let mut domain = vec![basis(0, 0, 0)];
    let mut image = vec![basis(0, 0, 1)];
    for k in 1..3 {
        domain.push(basis(k, 0, 0));
        let mut out = Ket::zeros(P * M * D);
        for j in 1..3 {
            out = out
                .add(&basis(j, 1, j + 1).scale(u[(j, k)]))
                .expect("same dim");
        }
        image.push(out);
    }
    let ready_map =
        PartialIsometryMap::new(P * M * D, domain, image).expect("orthonormal by construction");
    let total_unitary = complete_isometry_with(&ready_map, order);

    // Partner eigenvalue registered by detector j: ⟨j|U partner U†|j⟩.
    let rotated = u
        .compose(&partner)
        .and_then(|x| x.compose(&u.dagger()))
        .expect("3x3");
    let a_values = [1.0, -1.0, -1.0];
    let detectors = (0..3)
        .map(|j| Detector {
            label: format!("D{}", j + 1),
            index: j + 1,
            path: usize::from(j > 0),
            a_value: a_values[j],
            partner_value: rotated[(j, j)].re,
        })
        .collect();
    let p1 = Operator::dyad(&Ket::basis(P, 0));
    let p2 = Operator::identity(P).sub(&p1).expect("3x3");
    let paths = vec![
        Path {
            label: "D1".into(),
            a_value: 1.0,
            m_state: 0,
            particle_projector: p1,
            detectors: vec![0],
        },
        Path {
            label: "M1".into(),
            a_value: -1.0,
            m_state: 1,
            particle_projector: p2,
            detectors: vec![1, 2],
        },
    ];
    ApparatusModel {
        particle_dim: P,
        m_dim: M,
        d_dim: D,
        m_ready: 0,
        ready_map,
        total_unitary,
        paths,
        detectors,
        per_path_unitaries: vec![Operator::identity(P), u],
        context_label: context.label().to_string(),
    }
}

/// Apparatus for `A` together with any commuting Hermitian `partner`.
///
/// One path per eigenspace of `A` (descending eigenvalue), each with its own
/// `M` record state (`m_ready = 0`, path `α` ↦ `α + 1`). On path `α` the
/// per-path unitary sends the joint eigenvector `e_{α,i}` to the standard
/// basis vector `|offset_α + i⟩`, and the final splitter routes `|j⟩` to
/// detector `D{j+1}`. Paths are labelled `M1, M2, …`.
pub fn build_general(a: &Operator, partner: &Operator) -> Result<ApparatusModel> {
    build_general_with(a, partner, CompletionOrder::Canonical)
}

pub fn build_general_with(
    a: &Operator,
    partner: &Operator,
    order: CompletionOrder,
) -> Result<ApparatusModel> {
    let spec = ContextSpec::new(a, partner)?;
    let dec = spectral_decompose(a)?;
    let p = a.dim();
    let m_dim = dec.len() + 1;
    let d_dim = p + 1;
    let basis = |pi: usize, m: usize, d: usize| {
        Ket::basis(p, pi)
            .tensor(&Ket::basis(m_dim, m))
            .tensor(&Ket::basis(d_dim, d))
    };
    let ready = Ket::basis(m_dim, 0).tensor(&Ket::basis(d_dim, D_READY));

    let mut domain = Vec::with_capacity(p);
    let mut image = Vec::with_capacity(p);
    let mut detectors = Vec::with_capacity(p);
    let mut paths: Vec<Path> = dec
        .eigenvalues()
        .iter()
        .zip(dec.projectors())
        .enumerate()
        .map(|(alpha, (&a_value, proj))| Path {
            label: format!("M{}", alpha + 1),
            a_value,
            m_state: alpha + 1,
            particle_projector: proj.clone(),
            detectors: Vec::new(),
        })
        .collect();
    for (j, joint) in spec.joint_basis.iter().enumerate() {
        domain.push(joint.vector.tensor(&ready));
        image.push(basis(j, joint.block + 1, j + 1));
        paths[joint.block].detectors.push(j);
        detectors.push(Detector {
            label: format!("D{}", j + 1),
            index: j + 1,
            path: joint.block,
            a_value: joint.a_value,
            partner_value: joint.b_value,
        });
    }
    let ready_map = PartialIsometryMap::new(p * m_dim * d_dim, domain, image)?;
    let total_unitary = complete_isometry_with(&ready_map, order);
    Ok(ApparatusModel {
        particle_dim: p,
        m_dim,
        d_dim,
        m_ready: 0,
        ready_map,
        total_unitary,
        paths,
        detectors,
        per_path_unitaries: spec.per_path_unitaries,
        context_label: "partner".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use crate::sampling::random_states;
    use crate::tol;

    fn uniform() -> Ket {
        Ket::from_real(&[1.0, 1.0, 1.0])
            .unwrap()
            .normalized()
            .unwrap()
    }

    fn composite(m: &ApparatusModel, p: usize, mm: usize, d: usize) -> Ket {
        Ket::basis(m.particle_dim, p)
            .tensor(&Ket::basis(m.m_dim, mm))
            .tensor(&Ket::basis(m.d_dim, d))
    }

    #[test]
    fn figure1_dimensions_and_unitarity() {
        for ctx in [Context::B, Context::C] {
            let m = build_figure1(ctx);
            assert_eq!((m.particle_dim(), m.m_dim(), m.d_dim()), (3, 2, 4));
            assert!(m.total_unitary().unitarity_residual() <= tol::STRUCT);
        }
    }

    #[test]
    fn figure1_context_b_routes_two_to_d2() {
        let m = build_figure1(Context::B);
        let out = m
            .total_unitary()
            .apply(&m.prepare(&Ket::basis(3, 1)).unwrap())
            .unwrap();
        assert!(out.distance(&composite(&m, 1, 1, 2)).unwrap() < 1e-14);
    }

    #[test]
    fn figure1_context_c_routes_c_eigenvector_to_d2() {
        let m = build_figure1(Context::C);
        let s = 0.5f64.sqrt();
        let psi = Ket::from_real(&[0.0, s, s]).unwrap();
        let out = m.total_unitary().apply(&m.prepare(&psi).unwrap()).unwrap();
        assert!(out.distance(&composite(&m, 1, 1, 2)).unwrap() < 1e-14);
    }

    #[test]
    fn figure1_upper_path_is_context_independent() {
        for ctx in [Context::B, Context::C] {
            let m = build_figure1(ctx);
            let out = m
                .total_unitary()
                .apply(&m.prepare(&Ket::basis(3, 0)).unwrap())
                .unwrap();
            assert!(out.distance(&composite(&m, 0, 0, 1)).unwrap() < 1e-14);
        }
    }

    #[test]
    fn figure1_detectors_report_partner_eigenvalues() {
        let b: Vec<f64> = build_figure1(Context::B)
            .detectors()
            .iter()
            .map(|d| d.partner_value)
            .collect();
        let c: Vec<f64> = build_figure1(Context::C)
            .detectors()
            .iter()
            .map(|d| d.partner_value)
            .collect();
        for (got, want) in b.iter().zip([0.5, 1.0, -1.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        for (got, want) in c.iter().zip([2.0, 1.0, -1.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn outcome_projector_algebra() {
        let m = build_figure1(Context::C);
        let dec = m.outcome_projectors();
        assert_eq!(dec.labels(), &["D1", "M1", "R"]);
        let d1 = dec.get("D1").unwrap();
        let m1 = dec.get("M1").unwrap();
        let r = dec.get("R").unwrap();
        assert_eq!(d1.compose(m1).unwrap(), Operator::zeros(24));
        assert_eq!(d1.add(m1).unwrap().add(r).unwrap(), Operator::identity(24));
        // D1 = I ⊗ |m0⟩⟨m0| ⊗ |d1⟩⟨d1|
        let expected = Operator::identity(3)
            .tensor(&Operator::dyad(&Ket::basis(2, 0)).tensor(&Operator::dyad(&Ket::basis(4, 1))));
        assert_eq!(d1, &expected);
        let refined = m.refined_outcome_projectors();
        assert_eq!(refined.labels(), &["D1", "D2", "D3", "R"]);
    }

    #[test]
    fn run_statevector_uniform_context_b() {
        let dist = build_figure1(Context::B)
            .run_statevector(&uniform())
            .unwrap();
        for l in ["D1", "D2", "D3"] {
            assert!((dist.get(l).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!(dist.remainder() <= 1e-12);
    }

    #[test]
    fn run_statevector_uniform_context_c() {
        // U_C (|2⟩+|3⟩)/√3 = (2/√6)|2⟩, so D2 gets 2/3 and D3 nothing.
        let dist = build_figure1(Context::C)
            .run_statevector(&uniform())
            .unwrap();
        assert!((dist.get("D1").unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((dist.get("D2").unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(dist.get("D3").unwrap() < 1e-30);
    }

    #[test]
    fn run_statevector_rejects_unnormalized() {
        let m = build_figure1(Context::B);
        let bad = Ket::from_real(&[1.0, 1.0, 0.0]).unwrap();
        assert!(matches!(
            m.run_statevector(&bad),
            Err(Error::NotNormalized { .. })
        ));
        assert!(m.run_statevector(&Ket::basis(2, 0)).is_err());
    }

    #[test]
    fn completion_does_not_change_statistics() {
        for ctx in [Context::B, Context::C] {
            let m = build_figure1(ctx);
            let r = m.with_completion(CompletionOrder::Reversed);
            assert!(m.total_unitary().distance(r.total_unitary()).unwrap() > 0.1);
            for psi in random_states(3, 20, 4) {
                let a = m.run_statevector(&psi).unwrap();
                let b = r.run_statevector(&psi).unwrap();
                assert!(a.max_deviation(&b) <= 1e-12);
            }
        }
    }

    #[test]
    fn general_matches_figure1() {
        let (a, b, c) = canonical_observables();
        for (ctx, partner) in [(Context::B, b), (Context::C, c)] {
            let fig = build_figure1(ctx);
            let gen = build_general(&a, &partner).unwrap();
            assert_eq!((gen.m_dim(), gen.d_dim()), (3, 4));
            for psi in (0..3)
                .map(|k| Ket::basis(3, k))
                .chain(random_states(3, 10, 8))
            {
                let x = fig.run_statevector(&psi).unwrap();
                let y = gen.run_statevector(&psi).unwrap();
                assert!(x.max_deviation(&y) <= 1e-12, "{x:?} vs {y:?}");
            }
        }
    }

    #[test]
    fn general_with_identity_measures_partner_basis() {
        let (_, _, c) = canonical_observables();
        let m = build_general(&Operator::identity(3), &c).unwrap();
        assert_eq!(m.paths().len(), 1);
        let psi = random_states(3, 1, 21).remove(0);
        let dist = m.run_statevector(&psi).unwrap();
        let basis = crate::spectral::simultaneous_eigenbasis(&Operator::identity(3), &c).unwrap();
        for (k, e) in basis.iter().enumerate() {
            let born = e.inner(&psi).unwrap().norm_sqr();
            assert!((dist.get(&format!("D{}", k + 1)).unwrap() - born).abs() < 1e-12);
        }
    }

    #[test]
    fn general_rejects_noncommuting() {
        let (_, b, c) = canonical_observables();
        assert!(matches!(
            build_general(&b, &c),
            Err(Error::NotCommuting { .. })
        ));
    }

    #[test]
    fn per_path_unitaries_are_unitary() {
        let (a, _, c) = canonical_observables();
        let spec = ContextSpec::new(&a, &c).unwrap();
        assert_eq!(spec.per_path_unitaries.len(), 2);
        for u in &spec.per_path_unitaries {
            assert!(u.is_unitary());
        }
        // Path 2 sends (|2⟩+|3⟩)/√2 to |2⟩.
        let s = 0.5f64.sqrt();
        let v = Ket::new(vec![C64::new(0.0, 0.0), C64::new(s, 0.0), C64::new(s, 0.0)]).unwrap();
        let out = spec.per_path_unitaries[1].apply(&v).unwrap();
        assert!(out.distance(&Ket::basis(3, 1)).unwrap() < 1e-12);
    }
}
