//! Spectral decompositions, projective decompositions of the identity, and
//! joint eigenbases of commuting observables.

use crate::error::{Error, Result};
use crate::linalg::{Ket, Operator, C64};
use crate::sampling::{conjugate_diagonal, random_unitary, rng_from_seed};
use crate::tol;

const MAX_SWEEPS: usize = 100;

/// Eigenpairs of a Hermitian operator, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors; `vectors[k]` belongs to `values[k]`. The
    /// largest-magnitude component of each is real and positive.
    pub vectors: Vec<Ket>,
}

/// Eigen-decomposition of a Hermitian operator by cyclic complex Jacobi
/// rotations.
pub fn hermitian_eigen(h: &Operator) -> Result<Eigen> {
    h.ensure_hermitian()?;
    Ok(jacobi(h))
}

fn jacobi(h: &Operator) -> Eigen {
    let n = h.dim();
    // Work on the exactly-hermitian part.
    let sym = h
        .add(&h.dagger())
        .expect("same dim")
        .scale(C64::new(0.5, 0.0));
    let mut a = sym.entries().to_vec();
    let mut v = Operator::identity(n).entries().to_vec();
    let scale = sym.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-15 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                if mag <= 1e-300 || mag < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                    a[p * n + q] = C64::new(0.0, 0.0);
                    a[q * n + p] = C64::new(0.0, 0.0);
                    continue;
                }
                let phase_conj = (apq / mag).conj();
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G = diag(1, e^{-iφ}) · [[c, s], [-s, c]]
                let g_pp = C64::new(c, 0.0);
                let g_pq = C64::new(s, 0.0);
                let g_qp = phase_conj * (-s);
                let g_qq = phase_conj * c;

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * g_pp + akq * g_qp;
                    a[k * n + q] = akp * g_pq + akq * g_qq;
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * g_pp + vkq * g_qp;
                    v[k * n + q] = vkp * g_pq + vkq * g_qq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = g_pp.conj() * apk + g_qp.conj() * aqk;
                    a[q * n + k] = g_pq.conj() * apk + g_qq.conj() * aqk;
                }
                a[p * n + q] = C64::new(0.0, 0.0);
                a[q * n + p] = C64::new(0.0, 0.0);
                a[p * n + p].im = 0.0;
                a[q * n + q].im = 0.0;
            }
        }
    }

    let mut pairs: Vec<(f64, Ket)> = (0..n)
        .map(|k| {
            let col = Ket::new((0..n).map(|i| v[i * n + k]).collect()).expect("n > 0");
            (a[k * n + k].re, col.with_phase_fixed_at_largest())
        })
        .collect();
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    let (values, vectors) = pairs.into_iter().unzip();
    Eigen { values, vectors }
}

/// Groups descending eigenvalues whose consecutive gaps are at most
/// [`tol::CLUSTER`]. Returns index ranges into the sorted list.
fn cluster_ranges(values: &[f64]) -> Vec<std::ops::Range<usize>> {
    let mut ranges = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        if k == values.len() || values[k - 1] - values[k] > tol::CLUSTER {
            ranges.push(start..k);
            start = k;
        }
    }
    ranges
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// `A = Σ a_α P_α` with distinct `a_α` in descending order.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    projectors: Vec<Operator>,
    /// Orthonormal eigenvectors spanning each projector's range.
    eigenspaces: Vec<Vec<Ket>>,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[Operator] {
        &self.projectors
    }

    pub fn eigenspaces(&self) -> &[Vec<Ket>] {
        &self.eigenspaces
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim()
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.eigenspaces.iter().map(Vec::len).collect()
    }

    /// `Σ a_α P_α`.
    pub fn reconstruct(&self) -> Operator {
        self.eigenvalues
            .iter()
            .zip(&self.projectors)
            .fold(Operator::zeros(self.dim()), |acc, (&a, p)| {
                acc.add(&p.scale(C64::new(a, 0.0))).expect("same dim")
            })
    }

    /// The projectors as a decomposition of the identity, labelled
    /// `P1, P2, …` in eigenvalue order.
    pub fn to_decomposition(&self) -> ProjectiveDecomposition {
        let labels = (1..=self.len()).map(|k| format!("P{k}")).collect();
        ProjectiveDecomposition::new(labels, self.projectors.clone())
            .expect("spectral projectors form a decomposition of the identity")
    }
}

/// Spectral decomposition of a Hermitian operator with near-degenerate
/// eigenvalues merged.
pub fn spectral_decompose(h: &Operator) -> Result<SpectralDecomposition> {
    let eig = hermitian_eigen(h)?;
    let mut eigenvalues = Vec::new();
    let mut projectors = Vec::new();
    let mut eigenspaces = Vec::new();
    for r in cluster_ranges(&eig.values) {
        let vecs = eig.vectors[r.clone()].to_vec();
        eigenvalues.push(mean(&eig.values[r]));
        projectors.push(Operator::projector_onto(h.dim(), &vecs)?);
        eigenspaces.push(vecs);
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        projectors,
        eigenspaces,
    })
}

/// Labelled orthogonal projectors summing to the identity.
#[derive(Debug, Clone)]
pub struct ProjectiveDecomposition {
    labels: Vec<String>,
    projectors: Vec<Operator>,
}

impl ProjectiveDecomposition {
    /// Validates projector structure, mutual orthogonality and completeness.
    pub fn new(labels: Vec<String>, projectors: Vec<Operator>) -> Result<Self> {
        let invalid = |reason: String| Err(Error::InvalidDecomposition { reason });
        if projectors.is_empty() {
            return invalid("no projectors".into());
        }
        if labels.len() != projectors.len() {
            return invalid(format!(
                "{} labels for {} projectors",
                labels.len(),
                projectors.len()
            ));
        }
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() {
                return invalid(format!("projector {i} has an empty label"));
            }
            if labels[..i].contains(l) {
                return invalid(format!("duplicate label {l:?}"));
            }
        }
        let dim = projectors[0].dim();
        for (l, p) in labels.iter().zip(&projectors) {
            if p.dim() != dim {
                return invalid(format!("{l} has dimension {}, expected {dim}", p.dim()));
            }
            let herm = p.hermiticity_residual();
            let idem = p.idempotency_residual();
            if herm > tol::STRUCT || idem > tol::STRUCT {
                return invalid(format!(
                    "{l} is not a projector (||P - P^dag||_F = {herm:e}, ||P^2 - P||_F = {idem:e})"
                ));
            }
        }
        for i in 0..projectors.len() {
            for j in i + 1..projectors.len() {
                let overlap = projectors[i].compose(&projectors[j])?.frobenius_norm();
                if overlap > tol::STRUCT {
                    return invalid(format!(
                        "{} and {} are not orthogonal (||P_i P_j||_F = {overlap:e})",
                        labels[i], labels[j]
                    ));
                }
            }
        }
        let sum = projectors
            .iter()
            .try_fold(Operator::zeros(dim), |acc, p| acc.add(p))?;
        let deficit = sum.distance(&Operator::identity(dim))?;
        if deficit > tol::STRUCT {
            return invalid(format!(
                "projectors do not sum to the identity (||sum - I||_F = {deficit:e})"
            ));
        }
        Ok(ProjectiveDecomposition { labels, projectors })
    }

    /// `{P, I − P}` labelled `yes`/`no`.
    pub fn binary(yes: &str, p: Operator, no: &str) -> Result<Self> {
        let complement = Operator::identity(p.dim()).sub(&p)?;
        ProjectiveDecomposition::new(vec![yes.into(), no.into()], vec![p, complement])
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn projectors(&self) -> &[Operator] {
        &self.projectors
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn get(&self, label: &str) -> Option<&Operator> {
        self.index_of(label).map(|i| &self.projectors[i])
    }

    /// Each projector tensored on the right with `I_dim`, i.e. `P ⊗ I`.
    pub fn lift(&self, dim: usize) -> ProjectiveDecomposition {
        let id = Operator::identity(dim);
        ProjectiveDecomposition {
            labels: self.labels.clone(),
            projectors: self.projectors.iter().map(|p| p.tensor(&id)).collect(),
        }
    }

    /// Merges projectors: each group `(new_label, members)` becomes the sum of
    /// its members. Every existing label must appear in exactly one group.
    pub fn coarse_grain(&self, groups: &[(&str, &[&str])]) -> Result<ProjectiveDecomposition> {
        let mut used = vec![false; self.len()];
        let mut labels = Vec::with_capacity(groups.len());
        let mut projectors = Vec::with_capacity(groups.len());
        for (name, members) in groups {
            let mut sum = Operator::zeros(self.dim());
            for m in *members {
                let i = self
                    .index_of(m)
                    .ok_or_else(|| Error::InvalidDecomposition {
                        reason: format!("coarse-graining refers to unknown label {m:?}"),
                    })?;
                if used[i] {
                    return Err(Error::InvalidDecomposition {
                        reason: format!("label {m:?} appears in two groups"),
                    });
                }
                used[i] = true;
                sum = sum.add(&self.projectors[i])?;
            }
            labels.push(name.to_string());
            projectors.push(sum);
        }
        if let Some(i) = used.iter().position(|u| !u) {
            return Err(Error::InvalidDecomposition {
                reason: format!("label {:?} is not assigned to any group", self.labels[i]),
            });
        }
        ProjectiveDecomposition::new(labels, projectors)
    }

    /// The products `P_i Q_j` of two compatible decompositions, zero products
    /// dropped. Refuses noncommuting decompositions.
    pub fn common_refinement(&self, other: &ProjectiveDecomposition) -> Result<Self> {
        let max_commutator = max_cross_commutator(self, other)?;
        if max_commutator > tol::STRUCT {
            return Err(Error::IncompatibleDecompositions { max_commutator });
        }
        let mut labels = Vec::new();
        let mut projectors = Vec::new();
        for (lp, p) in self.labels.iter().zip(&self.projectors) {
            for (lq, q) in other.labels.iter().zip(&other.projectors) {
                let pq = p.compose(q)?;
                if pq.frobenius_norm() > tol::STRUCT {
                    labels.push(format!("{lp}&{lq}"));
                    projectors.push(pq);
                }
            }
        }
        ProjectiveDecomposition::new(labels, projectors)
    }
}

/// `‖[X, Y]‖_F ≤ τ_struct`.
pub fn commutes(x: &Operator, y: &Operator) -> Result<bool> {
    Ok(x.commutator(y)?.frobenius_norm() <= tol::STRUCT)
}

/// `max_α ‖[P_α, B]‖_F` over the projectors of `dec`.
pub fn projectors_commute(dec: &SpectralDecomposition, b: &Operator) -> Result<f64> {
    dec.projectors()
        .iter()
        .try_fold(0.0f64, |m, p| Ok(m.max(p.commutator(b)?.frobenius_norm())))
}

/// `max_{i,j} ‖[P_i, Q_j]‖_F`.
pub fn max_cross_commutator(
    p: &ProjectiveDecomposition,
    q: &ProjectiveDecomposition,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for a in p.projectors() {
        for b in q.projectors() {
            worst = worst.max(a.commutator(b)?.frobenius_norm());
        }
    }
    Ok(worst)
}

/// True iff every projector of `p` commutes with every projector of `q`,
/// the precondition for describing both within a single framework.
pub fn decompositions_compatible(
    p: &ProjectiveDecomposition,
    q: &ProjectiveDecomposition,
) -> Result<bool> {
    Ok(max_cross_commutator(p, q)? <= tol::STRUCT)
}

/// One vector of a joint eigenbasis.
#[derive(Debug, Clone)]
pub struct JointEigenvector {
    /// Index of the `A` eigenspace (descending eigenvalue order).
    pub block: usize,
    pub a_value: f64,
    pub b_value: f64,
    pub vector: Ket,
}

/// Joint eigenbasis of two commuting Hermitian operators, ordered by `A`
/// eigenvalue descending, then `B` eigenvalue descending.
pub fn joint_eigenbasis(a: &Operator, b: &Operator) -> Result<Vec<JointEigenvector>> {
    a.ensure_hermitian()?;
    b.ensure_hermitian()?;
    let norm = a.commutator(b)?.frobenius_norm();
    if norm > tol::STRUCT {
        return Err(Error::NotCommuting { norm });
    }
    let dec = spectral_decompose(a)?;
    let mut out = Vec::with_capacity(a.dim());
    for (block, (space, &a_value)) in dec.eigenspaces().iter().zip(dec.eigenvalues()).enumerate() {
        let k = space.len();
        // B restricted to the eigenspace: ⟨q_i|B|q_j⟩.
        let mut entries = Vec::with_capacity(k * k);
        for qi in space {
            for qj in space {
                entries.push(b.matrix_element(qi, qj)?);
            }
        }
        let restricted = Operator::new(k, entries)?;
        let inner = jacobi(&restricted);
        for (&b_value, w) in inner.values.iter().zip(&inner.vectors) {
            let mut v = Ket::zeros(a.dim());
            for (coef, q) in w.amplitudes().iter().zip(space) {
                v = v.add(&q.scale(*coef))?;
            }
            out.push(JointEigenvector {
                block,
                a_value,
                b_value,
                vector: v.with_phase_fixed_at_first(1e-9),
            });
        }
    }
    Ok(out)
}

/// Orthonormal basis diagonalizing both `a` and `b`; see [`joint_eigenbasis`]
/// for the ordering. Each vector's first nonzero component is real positive.
pub fn simultaneous_eigenbasis(a: &Operator, b: &Operator) -> Result<Vec<Ket>> {
    Ok(joint_eigenbasis(a, b)?
        .into_iter()
        .map(|j| j.vector)
        .collect())
}

/// `(V D₁ V†, V D₂ V†)` for a Haar-random `V` drawn from `seed`.
pub fn commuting_pair_with_spectra(
    spectrum_a: &[f64],
    spectrum_b: &[f64],
    seed: u64,
) -> Result<(Operator, Operator)> {
    if spectrum_a.len() != spectrum_b.len() {
        return Err(Error::DimensionMismatch {
            expected: spectrum_a.len(),
            found: spectrum_b.len(),
        });
    }
    if spectrum_a.is_empty() {
        return Err(Error::EmptyDimension);
    }
    let mut rng = rng_from_seed(seed);
    let v = random_unitary(spectrum_a.len(), &mut rng);
    Ok((
        conjugate_diagonal(&v, spectrum_a),
        conjugate_diagonal(&v, spectrum_b),
    ))
}

/// Random commuting Hermitian pair sharing a Haar-random eigenbasis. Both
/// spectra are drawn from `{-2, -1, 0, 1, 2}`, so repeated eigenvalues are
/// common.
pub fn random_commuting_pair(dim: usize, seed: u64) -> Result<(Operator, Operator)> {
    use rand::Rng;
    if dim < 2 {
        return Err(Error::InvalidArgument(format!(
            "random commuting pair needs dim >= 2, got {dim}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let v = random_unitary(dim, &mut rng);
    let mut spectrum = || -> Vec<f64> {
        (0..dim)
            .map(|_| rng.random_range(-2i32..=2) as f64)
            .collect()
    };
    let da = spectrum();
    let db = spectrum();
    Ok((conjugate_diagonal(&v, &da), conjugate_diagonal(&v, &db)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::random_hermitian;

    fn e(i: usize) -> Ket {
        Ket::basis(3, i)
    }

    fn canonical_triple() -> (Operator, Operator, Operator) {
        let a = Operator::from_real_diagonal(&[1.0, -1.0, -1.0]);
        let b = Operator::from_real_diagonal(&[0.5, 1.0, -1.0]);
        let c = Operator::from_real_rows(&[&[2.0, 0.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 1.0, 0.0]])
            .unwrap();
        (a, b, c)
    }

    #[test]
    fn identity_is_fully_degenerate() {
        let dec = spectral_decompose(&Operator::identity(3)).unwrap();
        assert_eq!(dec.eigenvalues(), &[1.0]);
        assert_eq!(dec.ranks(), vec![3]);
        assert!(
            dec.projectors()[0]
                .distance(&Operator::identity(3))
                .unwrap()
                < 1e-14
        );
    }

    #[test]
    fn a_splits_into_p1_p2() {
        let (a, _, _) = canonical_triple();
        let dec = spectral_decompose(&a).unwrap();
        assert_eq!(dec.eigenvalues(), &[1.0, -1.0]);
        let p1 = Operator::dyad(&e(0));
        let p2 = Operator::dyad(&e(1)).add(&Operator::dyad(&e(2))).unwrap();
        assert!(dec.projectors()[0].distance(&p1).unwrap() < 1e-14);
        assert!(dec.projectors()[1].distance(&p2).unwrap() < 1e-14);
    }

    #[test]
    fn c_eigenvectors() {
        let (_, _, c) = canonical_triple();
        let eig = hermitian_eigen(&c).unwrap();
        for (got, want) in eig.values.iter().zip([2.0, 1.0, -1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        let s = 0.5f64.sqrt();
        let want = [
            e(0),
            Ket::from_real(&[0.0, s, s]).unwrap(),
            Ket::from_real(&[0.0, s, -s]).unwrap(),
        ];
        for (v, w) in eig.vectors.iter().zip(&want) {
            let overlap = v.inner(w).unwrap().norm();
            assert!((overlap - 1.0).abs() < 1e-12, "overlap {overlap}");
        }
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let x = Operator::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(
            spectral_decompose(&x),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn commutation_of_canonical_triple() {
        let (a, b, c) = canonical_triple();
        assert!(commutes(&a, &b).unwrap());
        assert!(commutes(&a, &c).unwrap());
        assert!(!commutes(&b, &c).unwrap());
        assert!(commutes(&c, &Operator::identity(3)).unwrap());
        assert!(commutes(&a, &Operator::identity(2)).is_err());
    }

    #[test]
    fn simultaneous_basis_for_a_and_b_is_standard() {
        let (a, b, _) = canonical_triple();
        let basis = simultaneous_eigenbasis(&a, &b).unwrap();
        for (k, v) in basis.iter().enumerate() {
            assert!(v.distance(&e(k)).unwrap() < 1e-12);
        }
    }

    #[test]
    fn simultaneous_basis_for_a_and_c() {
        let (a, _, c) = canonical_triple();
        let joint = joint_eigenbasis(&a, &c).unwrap();
        let s = 0.5f64.sqrt();
        let want = [
            (1.0, 2.0, e(0)),
            (-1.0, 1.0, Ket::from_real(&[0.0, s, s]).unwrap()),
            (-1.0, -1.0, Ket::from_real(&[0.0, s, -s]).unwrap()),
        ];
        for (j, (av, bv, w)) in joint.iter().zip(want) {
            assert!((j.a_value - av).abs() < 1e-12);
            assert!((j.b_value - bv).abs() < 1e-12);
            assert!(j.vector.distance(&w).unwrap() < 1e-12);
        }
        assert_eq!(
            joint.iter().map(|j| j.block).collect::<Vec<_>>(),
            vec![0, 1, 1]
        );
    }

    #[test]
    fn simultaneous_basis_with_identity_is_eigenbasis() {
        let (_, _, c) = canonical_triple();
        let basis = simultaneous_eigenbasis(&Operator::identity(3), &c).unwrap();
        for v in &basis {
            let cv = c.apply(v).unwrap();
            let lambda = v.inner(&cv).unwrap();
            assert!(cv.distance(&v.scale(lambda)).unwrap() < 1e-12);
        }
    }

    #[test]
    fn simultaneous_basis_refuses_noncommuting() {
        let (_, b, c) = canonical_triple();
        match simultaneous_eigenbasis(&b, &c) {
            Err(Error::NotCommuting { norm }) => assert!((norm - 8f64.sqrt()).abs() < 1e-12),
            other => panic!("expected NotCommuting, got {other:?}"),
        }
    }

    #[test]
    fn projectors_of_a_commute_with_partners() {
        let (a, b, c) = canonical_triple();
        let dec = spectral_decompose(&a).unwrap();
        assert!(projectors_commute(&dec, &b).unwrap() <= 1e-10);
        assert!(projectors_commute(&dec, &c).unwrap() <= 1e-10);
        let mut rng = rng_from_seed(5);
        let h = random_hermitian(3, &mut rng);
        assert!(projectors_commute(&dec, &h).unwrap() > tol::STRUCT);
    }

    #[test]
    fn decomposition_compatibility() {
        let (a, _, _) = canonical_triple();
        let p = spectral_decompose(&a).unwrap().to_decomposition();
        assert!(decompositions_compatible(&p, &p).unwrap());

        let psi = Ket::from_real(&[1.0, 1.0, 0.0])
            .unwrap()
            .normalized()
            .unwrap();
        let q = ProjectiveDecomposition::binary("Q1", Operator::dyad(&psi), "Q2").unwrap();
        assert!(!decompositions_compatible(&p, &q).unwrap());
        assert!(!decompositions_compatible(&q, &p).unwrap());
        assert!(matches!(
            p.common_refinement(&q),
            Err(Error::IncompatibleDecompositions { .. })
        ));

        let q = ProjectiveDecomposition::binary("Q1", Operator::dyad(&e(0)), "Q2").unwrap();
        assert!(decompositions_compatible(&p, &q).unwrap());
        let r = p.common_refinement(&q).unwrap();
        assert_eq!(r.labels(), &["P1&Q1".to_string(), "P2&Q2".to_string()]);
    }

    #[test]
    fn decomposition_validation() {
        let p = Operator::dyad(&e(0));
        let err = ProjectiveDecomposition::new(vec!["a".into()], vec![p.clone()]).unwrap_err();
        assert!(err.to_string().contains("sum to the identity"));
        let err =
            ProjectiveDecomposition::new(vec!["a".into(), "a".into()], vec![p.clone(), p.clone()])
                .unwrap_err();
        assert!(err.to_string().contains("duplicate"));
        let err = ProjectiveDecomposition::new(
            vec!["a".into(), "b".into()],
            vec![p.clone(), Operator::identity(3)],
        )
        .unwrap_err();
        assert!(err.to_string().contains("not orthogonal"));
        let half = Operator::identity(3).scale(C64::new(0.5, 0.0));
        let err =
            ProjectiveDecomposition::new(vec!["h1".into(), "h2".into()], vec![half.clone(), half])
                .unwrap_err();
        assert!(err.to_string().contains("h1 is not a projector"));
    }

    #[test]
    fn coarse_graining() {
        let dec = spectral_decompose(&Operator::from_real_diagonal(&[3.0, 2.0, 1.0]))
            .unwrap()
            .to_decomposition();
        let c = dec
            .coarse_grain(&[("low", &["P2", "P3"]), ("high", &["P1"])])
            .unwrap();
        assert_eq!(c.get("low").unwrap().projector_rank(), 2);
        assert!(dec.coarse_grain(&[("x", &["P1", "P2"])]).is_err());
        assert!(dec
            .coarse_grain(&[("x", &["P1", "P1"]), ("y", &["P2", "P3"])])
            .is_err());
    }

    #[test]
    fn random_pair_is_deterministic_and_commutes() {
        for seed in 0..10 {
            let (a, b) = random_commuting_pair(5, seed).unwrap();
            assert!(commutes(&a, &b).unwrap());
            let (a2, b2) = random_commuting_pair(5, seed).unwrap();
            assert_eq!((a, b), (a2, b2));
        }
        assert!(random_commuting_pair(1, 0).is_err());
    }

    #[test]
    fn canonical_spectra_reproduce_commuting_structure() {
        let (a, b) =
            commuting_pair_with_spectra(&[1.0, -1.0, -1.0], &[0.5, 1.0, -1.0], 17).unwrap();
        assert!(commutes(&a, &b).unwrap());
        let da = spectral_decompose(&a).unwrap();
        assert_eq!(da.ranks(), vec![1, 2]);
        assert!((da.eigenvalues()[0] - 1.0).abs() < 1e-12);
        assert!((da.eigenvalues()[1] + 1.0).abs() < 1e-12);
        let db = spectral_decompose(&b).unwrap();
        for (got, want) in db.eigenvalues().iter().zip([1.0, 0.5, -1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }
}
