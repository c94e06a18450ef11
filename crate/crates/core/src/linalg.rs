//! Dense complex linear algebra on small Hilbert spaces.
//!
//! Operators are square matrices stored row-major. Composite spaces use the
//! Kronecker product with the left factor as the most significant index, so
//! for `particle ⊗ m ⊗ d` the basis index of `(p, m, d)` is
//! `(p * m_dim + m) * d_dim + d`.

use std::fmt;
use std::ops::Index;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// A state vector. Not necessarily normalized; see [`Ket::is_normalized`].
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    amps: Vec<C64>,
}

impl Ket {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::EmptyDimension);
        }
        Ok(Ket { amps })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Ket::new(amps.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "ket dimension must be positive");
        Ket {
            amps: vec![ZERO; dim],
        }
    }

    /// Standard basis vector `|index⟩` (zero-based).
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(
            index < dim,
            "basis index {index} out of range for dim {dim}"
        );
        let mut k = Ket::zeros(dim);
        k.amps[index] = ONE;
        k
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol::NORM
    }

    pub fn ensure_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized {
                norm_sqr: self.norm_sqr(),
            })
        }
    }

    pub fn normalized(&self) -> Result<Ket> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidArgument(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        Ok(self.scale(C64::new(1.0 / n, 0.0)))
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &Ket) -> Result<C64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .fold(ZERO, |acc, (a, b)| acc + a.conj() * b))
    }

    pub fn scale(&self, c: C64) -> Ket {
        Ket {
            amps: self.amps.iter().map(|a| a * c).collect(),
        }
    }

    pub fn add(&self, other: &Ket) -> Result<Ket> {
        check_dim(self.dim(), other.dim())?;
        Ok(Ket {
            amps: self
                .amps
                .iter()
                .zip(&other.amps)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Ket) -> Result<Ket> {
        check_dim(self.dim(), other.dim())?;
        Ok(Ket {
            amps: self
                .amps
                .iter()
                .zip(&other.amps)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Euclidean distance `‖self − other‖`.
    pub fn distance(&self, other: &Ket) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }

    /// Kronecker product `self ⊗ other`.
    pub fn tensor(&self, other: &Ket) -> Ket {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ket { amps }
    }

    /// Multiplies by a global phase so that the first component whose
    /// magnitude exceeds `threshold` is real and positive.
    pub fn with_phase_fixed_at_first(&self, threshold: f64) -> Ket {
        match self.amps.iter().find(|a| a.norm() > threshold) {
            Some(a) => self.scale(a.conj() / a.norm()),
            None => self.clone(),
        }
    }

    /// Multiplies by a global phase so that the largest-magnitude component
    /// (first one among near ties) is real and positive.
    pub fn with_phase_fixed_at_largest(&self) -> Ket {
        let max = self.amps.iter().map(|a| a.norm()).fold(0.0, f64::max);
        self.with_phase_fixed_at_first(max - 1e-9)
    }
}

impl Index<usize> for Ket {
    type Output = C64;

    fn index(&self, i: usize) -> &C64 {
        &self.amps[i]
    }
}

/// Shorthand for `u ⊗ v`.
pub fn tensor_ket(u: &Ket, v: &Ket) -> Ket {
    u.tensor(v)
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// A square complex matrix.
#[derive(Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    entries: Vec<C64>,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Operator({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for Operator {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.entries[i * self.dim + j]
    }
}

impl Operator {
    /// Builds an operator from row-major entries.
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyDimension);
        }
        check_dim(dim * dim, entries.len())?;
        Ok(Operator { dim, entries })
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            check_dim(dim, row.len())?;
            entries.extend(row);
        }
        Operator::new(dim, entries)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Operator::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "operator dimension must be positive");
        Operator {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut op = Operator::zeros(dim);
        for i in 0..dim {
            op.entries[i * dim + i] = ONE;
        }
        op
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut op = Operator::zeros(diag.len());
        for (i, &x) in diag.iter().enumerate() {
            op.entries[i * diag.len() + i] = C64::new(x, 0.0);
        }
        op
    }

    /// The dyad `|u⟩⟨v|`.
    pub fn outer(u: &Ket, v: &Ket) -> Result<Self> {
        check_dim(u.dim(), v.dim())?;
        let n = u.dim();
        let mut entries = Vec::with_capacity(n * n);
        for a in u.amplitudes() {
            for b in v.amplitudes() {
                entries.push(a * b.conj());
            }
        }
        Operator::new(n, entries)
    }

    /// `|u⟩⟨u|`; `u` should be normalized.
    pub fn dyad(u: &Ket) -> Self {
        Operator::outer(u, u).expect("same ket has equal dimensions")
    }

    /// Orthogonal projector onto the span of orthonormal `vectors`.
    pub fn projector_onto(dim: usize, vectors: &[Ket]) -> Result<Self> {
        let mut p = Operator::zeros(dim);
        for v in vectors {
            p = p.add(&Operator::outer(v, v)?)?;
        }
        Ok(p)
    }

    /// Operator whose `j`-th column is `columns[j]`.
    pub fn from_columns(columns: &[Ket]) -> Result<Self> {
        let dim = columns.len();
        if dim == 0 {
            return Err(Error::EmptyDimension);
        }
        let mut op = Operator::zeros(dim);
        for (j, c) in columns.iter().enumerate() {
            check_dim(dim, c.dim())?;
            for i in 0..dim {
                op.entries[i * dim + j] = c[i];
            }
        }
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn column(&self, j: usize) -> Ket {
        Ket {
            amps: (0..self.dim).map(|i| self[(i, j)]).collect(),
        }
    }

    pub fn dagger(&self) -> Operator {
        let n = self.dim;
        let mut out = Operator::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.entries[j * n + i] = self.entries[i * n + j].conj();
            }
        }
        out
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        check_dim(self.dim, other.dim)?;
        let n = self.dim;
        let mut out = Operator::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] += a * other.entries[k * n + j];
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        check_dim(self.dim, other.dim)?;
        Ok(Operator {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        check_dim(self.dim, other.dim)?;
        Ok(Operator {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn scale(&self, c: C64) -> Operator {
        Operator {
            dim: self.dim,
            entries: self.entries.iter().map(|a| a * c).collect(),
        }
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        self.compose(other)?.sub(&other.compose(self)?)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn tensor(&self, other: &Operator) -> Operator {
        let (m, n) = (self.dim, other.dim);
        let dim = m * n;
        let mut out = Operator::zeros(dim);
        for i1 in 0..m {
            for j1 in 0..m {
                let a = self.entries[i1 * m + j1];
                if a == ZERO {
                    continue;
                }
                for i2 in 0..n {
                    for j2 in 0..n {
                        out.entries[(i1 * n + i2) * dim + j1 * n + j2] =
                            a * other.entries[i2 * n + j2];
                    }
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &Ket) -> Result<Ket> {
        check_dim(self.dim, v.dim())?;
        let n = self.dim;
        let amps = (0..n)
            .map(|i| {
                self.entries[i * n..(i + 1) * n]
                    .iter()
                    .zip(v.amplitudes())
                    .fold(ZERO, |acc, (a, b)| acc + a * b)
            })
            .collect();
        Ok(Ket { amps })
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.entries[i * self.dim + i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `‖self − other‖_F`.
    pub fn distance(&self, other: &Operator) -> Result<f64> {
        Ok(self.sub(other)?.frobenius_norm())
    }

    /// `‖X − X†‖_F`.
    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.entries[i * n + j] - self.entries[j * n + i].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// `‖X†X − I‖_F`.
    pub fn unitarity_residual(&self) -> f64 {
        self.dagger()
            .compose(self)
            .expect("square")
            .distance(&Operator::identity(self.dim))
            .expect("same dim")
    }

    /// `‖X² − X‖_F`.
    pub fn idempotency_residual(&self) -> f64 {
        self.compose(self)
            .expect("square")
            .distance(self)
            .expect("same dim")
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_residual() <= tol::STRUCT
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_residual() <= tol::STRUCT
    }

    pub fn is_projector(&self) -> bool {
        self.is_hermitian() && self.idempotency_residual() <= tol::STRUCT
    }

    pub fn ensure_hermitian(&self) -> Result<()> {
        let residual = self.hermiticity_residual();
        if residual <= tol::STRUCT {
            Ok(())
        } else {
            Err(Error::NotHermitian { residual })
        }
    }

    pub fn ensure_unitary(&self) -> Result<()> {
        let residual = self.unitarity_residual();
        if residual <= tol::STRUCT {
            Ok(())
        } else {
            Err(Error::NotUnitary { residual })
        }
    }

    /// Rank of a projector, read off its trace.
    pub fn projector_rank(&self) -> usize {
        self.trace().re.round().max(0.0) as usize
    }

    /// `⟨u|self|v⟩`.
    pub fn matrix_element(&self, u: &Ket, v: &Ket) -> Result<C64> {
        u.inner(&self.apply(v)?)
    }
}

/// Largest deviation of the Gram matrix of `vectors` from the identity.
pub fn orthonormality_deviation(vectors: &[Ket]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (i, u) in vectors.iter().enumerate() {
        for (j, v) in vectors.iter().enumerate().skip(i) {
            let g = u.inner(v)?;
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((g - target).norm());
        }
    }
    Ok(worst)
}

/// A linear map given on an orthonormal set: `domain[k] ↦ image[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialIsometryMap {
    dim: usize,
    domain: Vec<Ket>,
    image: Vec<Ket>,
}

impl PartialIsometryMap {
    pub fn new(dim: usize, domain: Vec<Ket>, image: Vec<Ket>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyDimension);
        }
        check_dim(domain.len(), image.len())?;
        if domain.len() > dim {
            return Err(Error::InvalidArgument(format!(
                "{} vectors cannot be orthonormal in dimension {dim}",
                domain.len()
            )));
        }
        for v in domain.iter().chain(&image) {
            check_dim(dim, v.dim())?;
        }
        let deviation = orthonormality_deviation(&domain)?;
        if deviation > tol::STRUCT {
            return Err(Error::NotOrthonormal {
                what: "domain",
                deviation,
            });
        }
        let deviation = orthonormality_deviation(&image)?;
        if deviation > tol::STRUCT {
            return Err(Error::NotOrthonormal {
                what: "image",
                deviation,
            });
        }
        Ok(PartialIsometryMap { dim, domain, image })
    }

    /// The empty map on a `dim`-dimensional space.
    pub fn empty(dim: usize) -> Self {
        PartialIsometryMap {
            dim,
            domain: Vec::new(),
            image: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &[Ket] {
        &self.domain
    }

    pub fn image(&self) -> &[Ket] {
        &self.image
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }
}

/// How the orthogonal complements are paired when extending a partial
/// isometry to a unitary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CompletionOrder {
    /// `k`-th domain complement vector maps to `k`-th image complement vector.
    #[default]
    Canonical,
    /// Image complement vectors are paired in reverse order.
    Reversed,
}

/// Orthonormal basis of the complement of `vectors`, built by Gram–Schmidt
/// (two passes) over `|0⟩, |1⟩, …` in index order.
pub fn orthonormal_complement(dim: usize, vectors: &[Ket]) -> Vec<Ket> {
    let mut basis: Vec<Ket> = vectors.to_vec();
    let mut complement = Vec::with_capacity(dim.saturating_sub(vectors.len()));
    for i in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut v = Ket::basis(dim, i);
        for _ in 0..2 {
            for b in &basis {
                let c = b.inner(&v).expect("same dim");
                v = v.sub(&b.scale(c)).expect("same dim");
            }
        }
        let n = v.norm();
        if n > 1e-6 {
            let v = v.scale(C64::new(1.0 / n, 0.0));
            basis.push(v.clone());
            complement.push(v);
        }
    }
    complement
}

/// Extends `map` to a unitary using [`CompletionOrder::Canonical`].
pub fn complete_isometry(map: &PartialIsometryMap) -> Operator {
    complete_isometry_with(map, CompletionOrder::Canonical)
}

/// Extends `map` to a unitary `U = Σ |image_k⟩⟨domain_k| + Σ |f_j⟩⟨g_j|`, where
/// `g_j` and `f_j` are the deterministic orthonormal complements of the
/// domain and image.
pub fn complete_isometry_with(map: &PartialIsometryMap, order: CompletionOrder) -> Operator {
    let n = map.dim;
    let mut u = Operator::zeros(n);
    let mut accumulate = |out: &Ket, inp: &Ket| {
        for i in 0..n {
            if out[i] == ZERO {
                continue;
            }
            for j in 0..n {
                u.entries[i * n + j] += out[i] * inp[j].conj();
            }
        }
    };
    for (d, im) in map.domain.iter().zip(&map.image) {
        accumulate(im, d);
    }
    let domain_rest = orthonormal_complement(n, &map.domain);
    let mut image_rest = orthonormal_complement(n, &map.image);
    if order == CompletionOrder::Reversed {
        image_rest.reverse();
    }
    for (g, f) in domain_rest.iter().zip(&image_rest) {
        accumulate(f, g);
    }
    u
}
