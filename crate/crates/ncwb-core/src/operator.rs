//! Dense complex Hermitian operator algebra.
//!
//! Effects, projectors, density operators, spectral decomposition with
//! eigenvalue merging, Born-rule probabilities, and the Hilbert-Schmidt
//! inner product. All values are immutable after construction and all
//! operations are pure.

use nalgebra::{Complex, DMatrix};
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;
use crate::tol::{TAU_EIG, TAU_HERM, TAU_SUM, TAU_TRACE};
use crate::Result;

/// Square complex matrix, row-major. The workhorse behind the validated
/// operator types; carries no invariant of its own.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Real diagonal matrix.
    pub fn diag(values: &[f64]) -> Self {
        Self::from_fn(values.len(), |i, j| {
            if i == j {
                Complex64::new(values[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Outer product v v† of a complex column vector.
    pub fn outer(v: &[Complex64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matrix dimensions must agree");
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matrix dimensions must agree");
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matrix dimensions must agree");
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..d {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Largest entrywise absolute value.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Kronecker product with `self` as the left (slow-index) factor.
    pub fn kron(&self, other: &Self) -> Self {
        let (da, db) = (self.dim, other.dim);
        Self::from_fn(da * db, |i, j| {
            self.get(i / db, j / db) * other.get(i % db, j % db)
        })
    }

    /// Apply `v -> M v` to a complex vector.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// Deviation from conjugate symmetry.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }
}

/// A validated d x d complex Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    mat: ComplexMatrix,
}

impl HermitianOperator {
    /// Validate conjugate symmetry within the default tolerance.
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(mat, TAU_HERM)
    }

    /// Validate conjugate symmetry within `tau_herm`.
    pub fn with_tolerance(mat: ComplexMatrix, tau_herm: f64) -> Result<Self> {
        if mat.dim == 0 {
            return Err(Error::DimensionMismatch("dimension must be >= 1".into()));
        }
        let deviation = mat.hermiticity_defect();
        if deviation > tau_herm {
            return Err(Error::NotHermitian {
                deviation,
                tol: tau_herm,
            });
        }
        Ok(Self { mat })
    }

    /// Internal constructor for matrices Hermitian by construction
    /// (sums/real-scalings of Hermitians, conjugations, projectors).
    pub(crate) fn trusted(mat: ComplexMatrix) -> Self {
        debug_assert!(mat.hermiticity_defect() <= 1e-7);
        Self { mat }
    }

    pub fn identity(dim: usize) -> Self {
        Self::trusted(ComplexMatrix::identity(dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::trusted(ComplexMatrix::zeros(dim))
    }

    pub fn diag(values: &[f64]) -> Self {
        Self::trusted(ComplexMatrix::diag(values))
    }

    /// Rank-1 projector |v><v| / <v|v>.
    pub fn projector_onto(v: &[Complex64]) -> Self {
        let norm_sq: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        assert!(norm_sq > 0.0, "cannot project onto the zero vector");
        Self::trusted(ComplexMatrix::outer(v).scale_re(1.0 / norm_sq))
    }

    pub fn dim(&self) -> usize {
        self.mat.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.mat.get(i, j)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::trusted(self.mat.add(&other.mat))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::trusted(self.mat.sub(&other.mat))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::trusted(self.mat.scale_re(c))
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self::trusted(self.mat.kron(&other.mat))
    }

    /// Entrywise equality within `tau`.
    pub fn approx_eq(&self, other: &Self, tau: f64) -> bool {
        self.dim() == other.dim() && self.mat.sub(&other.mat).max_abs() <= tau
    }

    /// Eigenvalues in ascending order (no projectors).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let d = self.dim();
        let m = DMatrix::from_fn(d, d, |i, j| {
            let z = self.get(i, j);
            Complex::new(z.re, z.im)
        });
        let mut vals: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()
            .first()
            .copied()
            .expect("dimension >= 1")
    }
}

/// An effect: Hermitian with spectrum in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Effect {
    op: HermitianOperator,
}

impl Effect {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        Self::with_tolerance(op, TAU_EIG)
    }

    pub fn with_tolerance(op: HermitianOperator, tau_eig: f64) -> Result<Self> {
        for ev in op.eigenvalues() {
            if ev < -tau_eig || ev > 1.0 + tau_eig {
                return Err(Error::NotEffect {
                    eigenvalue: ev,
                    tol: tau_eig,
                });
            }
        }
        Ok(Self { op })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            op: HermitianOperator::identity(dim),
        }
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// Complement I - E, an effect whenever E is.
    pub fn complement(&self) -> Self {
        Self {
            op: HermitianOperator::identity(self.dim()).sub(&self.op),
        }
    }

    pub fn into_op(self) -> HermitianOperator {
        self.op
    }
}

/// A density operator: positive semidefinite with unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    op: HermitianOperator,
}

impl DensityOperator {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        Self::with_tolerance(op, TAU_EIG, TAU_TRACE)
    }

    pub fn with_tolerance(op: HermitianOperator, tau_eig: f64, tau_trace: f64) -> Result<Self> {
        let min = op.min_eigenvalue();
        if min < -tau_eig {
            return Err(Error::NotDensity(format!(
                "minimum eigenvalue {min} below 0 beyond {tau_eig:.3e}"
            )));
        }
        let tr = op.matrix().trace();
        if (tr.re - 1.0).abs() > tau_trace || tr.im.abs() > tau_trace {
            return Err(Error::NotDensity(format!(
                "trace {tr} differs from 1 beyond {tau_trace:.3e}"
            )));
        }
        Ok(Self { op })
    }

    /// Maximally mixed state I/d.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            op: HermitianOperator::identity(dim).scale(1.0 / dim as f64),
        }
    }

    /// Pure state |v><v| (v need not be normalized).
    pub fn pure(v: &[Complex64]) -> Self {
        Self {
            op: HermitianOperator::projector_onto(v),
        }
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }
}

/// Spectral resolution H = sum_i s_i P_i with distinct merged eigenvalues and
/// eigenspace projectors (possibly rank > 1).
#[derive(Debug, Clone)]
pub struct SpectralResolution {
    /// Distinct eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// Matching eigenspace projectors; they sum to the identity.
    pub projectors: Vec<HermitianOperator>,
}

impl SpectralResolution {
    /// Reconstruct sum_i s_i P_i.
    pub fn reconstruct(&self) -> HermitianOperator {
        let dim = self.projectors[0].dim();
        let mut acc = HermitianOperator::zeros(dim);
        for (s, p) in self.eigenvalues.iter().zip(&self.projectors) {
            acc = acc.add(&p.scale(*s));
        }
        acc
    }
}

/// Eigenspace decomposition of a Hermitian operator; eigenvalues closer than
/// `tau_degen` merge into a single eigenspace.
pub fn spectral_decompose(h: &HermitianOperator, tau_degen: f64) -> Result<SpectralResolution> {
    let d = h.dim();
    let m = DMatrix::from_fn(d, d, |i, j| {
        let z = h.get(i, j);
        Complex::new(z.re, z.im)
    });
    let eig = m.symmetric_eigen();

    // Sort eigenpairs by descending eigenvalue.
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());

    let mut eigenvalues = Vec::new();
    let mut projectors: Vec<HermitianOperator> = Vec::new();
    let mut idx = 0;
    while idx < d {
        // Greedy cluster: absolute gap below tau_degen joins the cluster.
        let mut cluster = vec![order[idx]];
        while idx + 1 < d
            && (eig.eigenvalues[order[idx]] - eig.eigenvalues[order[idx + 1]]).abs() < tau_degen
        {
            idx += 1;
            cluster.push(order[idx]);
        }
        idx += 1;

        let mean =
            cluster.iter().map(|&c| eig.eigenvalues[c]).sum::<f64>() / cluster.len() as f64;
        let mut proj = ComplexMatrix::zeros(d);
        for &c in &cluster {
            let col: Vec<Complex64> = (0..d)
                .map(|i| {
                    let z = eig.eigenvectors[(i, c)];
                    Complex64::new(z.re, z.im)
                })
                .collect();
            proj = proj.add(&ComplexMatrix::outer(&col));
        }
        eigenvalues.push(mean);
        projectors.push(HermitianOperator::trusted(proj));
    }

    let res = SpectralResolution {
        eigenvalues,
        projectors,
    };
    let residue = res.reconstruct().sub(h).matrix().max_abs();
    if residue > TAU_SUM.max(tau_degen) {
        return Err(Error::NumericalFailure(format!(
            "spectral reconstruction residue {residue:.3e}"
        )));
    }
    Ok(res)
}

/// True iff ||E^2 - E||_max <= tau.
pub fn is_projector(e: &HermitianOperator, tau: f64) -> bool {
    let sq = e.matrix().mul(e.matrix());
    sq.sub(e.matrix()).max_abs() <= tau
}

/// True iff every eigenvalue lies in [-tau, 1 + tau].
pub fn is_effect(e: &HermitianOperator, tau: f64) -> bool {
    e.eigenvalues()
        .into_iter()
        .all(|ev| ev >= -tau && ev <= 1.0 + tau)
}

/// Born probability tr(rho E), clamped to [0, 1] only when it strays within
/// `TAU_TRACE` of the boundary.
pub fn born(rho: &DensityOperator, e: &Effect) -> Result<f64> {
    born_with_tolerance(rho, e, TAU_TRACE)
}

pub fn born_with_tolerance(rho: &DensityOperator, e: &Effect, tau_trace: f64) -> Result<f64> {
    if rho.dim() != e.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dim {} vs effect dim {}",
            rho.dim(),
            e.dim()
        )));
    }
    let tr = rho.op().matrix().mul(e.op().matrix()).trace();
    if tr.im.abs() > tau_trace {
        return Err(Error::NumericalFailure(format!(
            "imaginary residue {:.3e} on Born probability",
            tr.im
        )));
    }
    let p = tr.re;
    if p < -tau_trace || p > 1.0 + tau_trace {
        return Err(Error::OutOfRange {
            value: p,
            lo: 0.0,
            hi: 1.0,
            tol: tau_trace,
        });
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Hilbert-Schmidt inner product tr(AB) of two Hermitian operators.
pub fn hs_inner(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "dims {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(a.matrix().mul(b.matrix()).trace().re)
}

// --- JSON encoding: {"dim": n, "entries": [[[re, im], ...], ...]} ---

#[derive(Serialize, Deserialize)]
struct HermitianJson {
    dim: usize,
    entries: Vec<Vec<[f64; 2]>>,
}

impl Serialize for HermitianOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let d = self.dim();
        let entries = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        let z = self.get(i, j);
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        HermitianJson { dim: d, entries }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HermitianOperator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = HermitianJson::deserialize(deserializer)?;
        if raw.entries.len() != raw.dim || raw.entries.iter().any(|r| r.len() != raw.dim) {
            return Err(D::Error::custom(format!(
                "entries must form a {0}x{0} matrix",
                raw.dim
            )));
        }
        let mat = ComplexMatrix::from_fn(raw.dim, |i, j| {
            Complex64::new(raw.entries[i][j][0], raw.entries[i][j][1])
        });
        HermitianOperator::new(mat).map_err(D::Error::custom)
    }
}

impl Serialize for Effect {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.op.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Effect {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let op = HermitianOperator::deserialize(deserializer)?;
        Effect::new(op).map_err(D::Error::custom)
    }
}

impl Serialize for DensityOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.op.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DensityOperator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let op = HermitianOperator::deserialize(deserializer)?;
        DensityOperator::new(op).map_err(D::Error::custom)
    }
}

// --- Common constructions used across the crate and its tests ---

/// Computational basis vector e_k in dimension d.
pub fn basis_vector(dim: usize, k: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); dim];
    v[k] = Complex64::new(1.0, 0.0);
    v
}

/// Qubit projector (I + x sx + y sy + z sz)/2 onto the Bloch direction (x, y, z).
pub fn bloch_projector(x: f64, y: f64, z: f64) -> HermitianOperator {
    let half = 0.5;
    HermitianOperator::trusted(ComplexMatrix::from_fn(2, |i, j| match (i, j) {
        (0, 0) => Complex64::new(half * (1.0 + z), 0.0),
        (0, 1) => Complex64::new(half * x, -half * y),
        (1, 0) => Complex64::new(half * x, half * y),
        (1, 1) => Complex64::new(half * (1.0 - z), 0.0),
        _ => unreachable!(),
    }))
}

/// The three rank-1 qubit projectors at 120-degree separations in the x-z
/// Bloch plane, so that (2/3)(P1 + P2 + P3) = I.
pub fn trine_projectors() -> [HermitianOperator; 3] {
    let angles = [0.0, 2.0 * std::f64::consts::PI / 3.0, 4.0 * std::f64::consts::PI / 3.0];
    angles.map(|t| bloch_projector(t.sin(), 0.0, t.cos()))
}
