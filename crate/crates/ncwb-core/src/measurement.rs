//! POVM algebra and operational theories.
//!
//! Post-processing by stochastic maps, coarse-graining, convex mixing,
//! Naimark extension and reduction, and the finite operational theories
//! (preparations, measurements, probability table) the checks run on.
//!
//! Tensor-product convention: the system is the left Kronecker factor, so
//! the system index varies slowest and a joint index reads `s * anc_dim + a`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::operator::{
    basis_vector, born, is_projector, spectral_decompose, trine_projectors, ComplexMatrix,
    DensityOperator, Effect, HermitianOperator,
};
use crate::report::Report;
use crate::tol::{TAU_DEGEN, TAU_EIG, TAU_SUM, TAU_TRACE};
use crate::Result;

/// An ordered list of effects summing to the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    dim: usize,
    effects: Vec<Effect>,
    labels: Vec<String>,
}

impl Povm {
    /// Outcome labels default to "0", "1", ...
    pub fn new(effects: Vec<Effect>) -> Result<Self> {
        let labels = (0..effects.len()).map(|k| k.to_string()).collect();
        Self::with_labels(effects, labels)
    }

    pub fn with_labels(effects: Vec<Effect>, labels: Vec<String>) -> Result<Self> {
        if effects.is_empty() {
            return Err(Error::DimensionMismatch("POVM needs at least one effect".into()));
        }
        if labels.len() != effects.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} effects",
                labels.len(),
                effects.len()
            )));
        }
        let dim = effects[0].dim();
        if effects.iter().any(|e| e.dim() != dim) {
            return Err(Error::DimensionMismatch(
                "effects must share one dimension".into(),
            ));
        }
        let mut sum = HermitianOperator::zeros(dim);
        for e in &effects {
            sum = sum.add(e.op());
        }
        let deviation = sum.sub(&HermitianOperator::identity(dim)).matrix().max_abs();
        if deviation > TAU_SUM {
            return Err(Error::NotResolution {
                deviation,
                tol: TAU_SUM,
            });
        }
        Ok(Self { dim, effects, labels })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn effect(&self, k: usize) -> &Effect {
        &self.effects[k]
    }

    /// True iff every element is a projector within `tau`.
    pub fn is_sharp(&self, tau: f64) -> bool {
        self.effects.iter().all(|e| is_projector(e.op(), tau))
    }

    /// Elementwise equality within `tau` (labels ignored).
    pub fn approx_eq(&self, other: &Self, tau: f64) -> bool {
        self.len() == other.len()
            && self
                .effects
                .iter()
                .zip(other.effects())
                .all(|(a, b)| a.op().approx_eq(b.op(), tau))
    }
}

/// Column-stochastic map s(j|k): entry `rows[j][k]` is the probability of
/// output j given input k.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StochasticMap {
    rows: Vec<Vec<f64>>,
}

impl StochasticMap {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::NotStochastic("map must be nonempty".into()));
        }
        let inputs = rows[0].len();
        if rows.iter().any(|r| r.len() != inputs) {
            return Err(Error::NotStochastic("ragged rows".into()));
        }
        for r in &rows {
            for &v in r {
                if !(0.0..=1.0 + TAU_SUM).contains(&v) {
                    return Err(Error::NotStochastic(format!("entry {v} outside [0, 1]")));
                }
            }
        }
        for k in 0..inputs {
            let col: f64 = rows.iter().map(|r| r[k]).sum();
            if (col - 1.0).abs() > TAU_SUM {
                return Err(Error::NotStochastic(format!(
                    "column {k} sums to {col}, expected 1"
                )));
            }
        }
        Ok(Self { rows })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: (0..n)
                .map(|j| (0..n).map(|k| if j == k { 1.0 } else { 0.0 }).collect())
                .collect(),
        }
    }

    pub fn outputs(&self) -> usize {
        self.rows.len()
    }

    pub fn inputs(&self) -> usize {
        self.rows[0].len()
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.rows[j][k]
    }

    /// Composition (self after earlier): t(j|i) = sum_k self(j|k) earlier(k|i).
    pub fn compose(&self, earlier: &Self) -> Result<Self> {
        if self.inputs() != earlier.outputs() {
            return Err(Error::DimensionMismatch(format!(
                "composing {}-input map with {}-output map",
                self.inputs(),
                earlier.outputs()
            )));
        }
        let rows = (0..self.outputs())
            .map(|j| {
                (0..earlier.inputs())
                    .map(|i| {
                        (0..self.inputs())
                            .map(|k| self.get(j, k) * earlier.get(k, i))
                            .sum()
                    })
                    .collect()
            })
            .collect();
        Self::new(rows)
    }
}

/// Classical post-processing: output POVM with elements E'_j = sum_k s(j|k) E_k.
pub fn post_process(m: &Povm, s: &StochasticMap) -> Result<Povm> {
    if s.inputs() != m.len() {
        return Err(Error::DimensionMismatch(format!(
            "map expects {} inputs, POVM has {} outcomes",
            s.inputs(),
            m.len()
        )));
    }
    let mut effects = Vec::with_capacity(s.outputs());
    for j in 0..s.outputs() {
        let mut acc = HermitianOperator::zeros(m.dim());
        for k in 0..m.len() {
            acc = acc.add(&m.effect(k).op().scale(s.get(j, k)));
        }
        effects.push(Effect::new(acc)?);
    }
    Povm::new(effects)
}

/// Merge outcome blocks: the effect of a block is the sum over its members.
/// `partition` lists outcome labels; blocks must be disjoint and cover all
/// outcomes. Block labels join the member labels with '+'.
pub fn coarse_grain(m: &Povm, partition: &[Vec<String>]) -> Result<Povm> {
    let mut seen = vec![false; m.len()];
    let mut effects = Vec::with_capacity(partition.len());
    let mut labels = Vec::with_capacity(partition.len());
    for block in partition {
        if block.is_empty() {
            return Err(Error::InvalidPartition("empty block".into()));
        }
        let mut acc = HermitianOperator::zeros(m.dim());
        for label in block {
            let k = m
                .labels()
                .iter()
                .position(|l| l == label)
                .ok_or_else(|| Error::InvalidPartition(format!("unknown outcome '{label}'")))?;
            if seen[k] {
                return Err(Error::InvalidPartition(format!(
                    "outcome '{label}' appears in two blocks"
                )));
            }
            seen[k] = true;
            acc = acc.add(m.effect(k).op());
        }
        effects.push(Effect::new(acc)?);
        labels.push(block.join("+"));
    }
    if !seen.iter().all(|&s| s) {
        return Err(Error::InvalidPartition("blocks do not cover all outcomes".into()));
    }
    Povm::with_labels(effects, labels)
}

/// Convex mixture G_k = sum_a w_a E_k^(a) of POVMs sharing dimension and
/// outcome labels.
pub fn convex_mix(ms: &[Povm], w: &[f64]) -> Result<Povm> {
    if ms.is_empty() || ms.len() != w.len() {
        return Err(Error::WeightError(format!(
            "{} weights for {} POVMs",
            w.len(),
            ms.len()
        )));
    }
    if w.iter().any(|&x| x < 0.0) {
        return Err(Error::WeightError("negative weight".into()));
    }
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > TAU_SUM {
        return Err(Error::WeightError(format!("weights sum to {total}")));
    }
    let first = &ms[0];
    for m in ms {
        if m.dim() != first.dim() || m.labels() != first.labels() {
            return Err(Error::DimensionMismatch(
                "POVMs must share dimension and outcome labels".into(),
            ));
        }
    }
    let effects = (0..first.len())
        .map(|k| {
            let mut acc = HermitianOperator::zeros(first.dim());
            for (m, &wa) in ms.iter().zip(w) {
                acc = acc.add(&m.effect(k).op().scale(wa));
            }
            Effect::new(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    Povm::with_labels(effects, first.labels().to_vec())
}

/// Effective system POVM of a joint measurement with a fixed ancilla state:
/// E_k = Tr_a((I_s (x) rho_a) Pi_k). Zero effects keep their labels unless
/// `drop_zeros` is set.
pub fn reduce(joint: &Povm, rho_a: &DensityOperator, drop_zeros: bool) -> Result<Povm> {
    let anc = rho_a.dim();
    if !joint.dim().is_multiple_of(anc) {
        return Err(Error::DimensionMismatch(format!(
            "joint dimension {} does not factor over ancilla dimension {anc}",
            joint.dim()
        )));
    }
    let sys = joint.dim() / anc;
    let mut effects = Vec::new();
    let mut labels = Vec::new();
    for (k, e) in joint.effects().iter().enumerate() {
        let mut out = ComplexMatrix::zeros(sys);
        for i in 0..sys {
            for j in 0..sys {
                let mut acc = Complex64::new(0.0, 0.0);
                for a in 0..anc {
                    for b in 0..anc {
                        acc += rho_a.op().get(a, b) * e.op().get(i * anc + b, j * anc + a);
                    }
                }
                out.set(i, j, acc);
            }
        }
        if drop_zeros && out.max_abs() < TAU_SUM {
            continue;
        }
        effects.push(Effect::new(HermitianOperator::new(out)?)?);
        labels.push(joint.labels()[k].clone());
    }
    Povm::with_labels(effects, labels)
}

/// A projective joint measurement plus ancilla preparation realizing a POVM
/// on the system alone.
#[derive(Debug, Clone)]
pub struct NaimarkExtension {
    pub system_dim: usize,
    pub ancilla_dim: usize,
    pub ancilla_state: DensityOperator,
    pub joint_pvm: Povm,
}

impl NaimarkExtension {
    /// Check the defining invariants against a target POVM: every joint
    /// element is a projector and the reduction reproduces the target.
    pub fn verify(&self, target: &Povm, drop_zeros: bool, tau: f64) -> Result<()> {
        if self.joint_pvm.dim() != self.system_dim * self.ancilla_dim {
            return Err(Error::DimensionMismatch(
                "joint PVM dimension differs from system x ancilla".into(),
            ));
        }
        for (k, e) in self.joint_pvm.effects().iter().enumerate() {
            if !is_projector(e.op(), tau) {
                return Err(Error::ConstructionFailure(format!(
                    "joint element {k} is not a projector"
                )));
            }
        }
        let reduced = reduce(&self.joint_pvm, &self.ancilla_state, drop_zeros)?;
        if !reduced.approx_eq(target, tau) {
            return Err(Error::ConstructionFailure(
                "reduction does not reproduce the target POVM".into(),
            ));
        }
        Ok(())
    }

    /// Outcome statistics of the joint PVM on a joint state.
    pub fn joint_statistics(&self, joint_state: &DensityOperator) -> Result<Vec<f64>> {
        self.joint_pvm
            .effects()
            .iter()
            .map(|e| born(joint_state, e))
            .collect()
    }
}

/// The two standard extensions of the fair-coin POVM {I/2, I/2} on a qubit.
///
/// The first entangles the outcome with the system through the trine
/// projectors (pairwise Bloch overlap 1/4) and a uniformly mixed qutrit
/// ancilla; the second ignores the system entirely and reads a basis
/// measurement off an ancilla prepared as an equal mixture of its first two
/// basis states (its third reduced effect is exactly zero).
pub fn fair_coin_naimark_pair() -> (NaimarkExtension, NaimarkExtension) {
    let trine = trine_projectors();
    let mut pi_sa = ComplexMatrix::zeros(6);
    for (i, p) in trine.iter().enumerate() {
        let anc = HermitianOperator::projector_onto(&basis_vector(3, i));
        pi_sa = pi_sa.add(p.kron(&anc).matrix());
    }
    let pi_sa = HermitianOperator::trusted(pi_sa);
    let complement = HermitianOperator::identity(6).sub(&pi_sa);
    let ext1 = NaimarkExtension {
        system_dim: 2,
        ancilla_dim: 3,
        ancilla_state: DensityOperator::maximally_mixed(3),
        joint_pvm: Povm::new(vec![
            Effect::new(pi_sa).expect("projector is an effect"),
            Effect::new(complement).expect("projector is an effect"),
        ])
        .expect("binary PVM resolves identity"),
    };

    let id2 = HermitianOperator::identity(2);
    let joint2 = (0..3)
        .map(|a| {
            let anc = HermitianOperator::projector_onto(&basis_vector(3, a));
            Effect::new(id2.kron(&anc)).expect("projector is an effect")
        })
        .collect::<Vec<_>>();
    let mut sigma = ComplexMatrix::zeros(3);
    sigma.set(0, 0, Complex64::new(0.5, 0.0));
    sigma.set(1, 1, Complex64::new(0.5, 0.0));
    let ext2 = NaimarkExtension {
        system_dim: 2,
        ancilla_dim: 3,
        ancilla_state: DensityOperator::new(HermitianOperator::trusted(sigma))
            .expect("valid ancilla state"),
        joint_pvm: Povm::new(joint2).expect("ancilla basis PVM resolves identity"),
    };
    (ext1, ext2)
}

/// Isometric dilation of an arbitrary POVM: V psi = sum_k (sqrt(E_k) psi) (x) |k>,
/// completed to a unitary, with the ancilla prepared in its first basis state.
/// The resulting joint PVM reduces exactly to the input.
pub fn naimark_extend(m: &Povm) -> Result<NaimarkExtension> {
    let d = m.dim();
    let n = m.len();
    let joint_dim = d * n;

    // Square roots via the spectral resolution, clamping roundoff-negative
    // eigenvalues to zero.
    let mut roots = Vec::with_capacity(n);
    for e in m.effects() {
        let res = spectral_decompose(e.op(), TAU_DEGEN)?;
        let mut acc = HermitianOperator::zeros(d);
        for (s, p) in res.eigenvalues.iter().zip(&res.projectors) {
            acc = acc.add(&p.scale(s.max(0.0).sqrt()));
        }
        roots.push(acc);
    }

    // Columns of the isometry: column j has entries sqrtE_k[i, j] at joint
    // index i * n + k.
    let mut columns: Vec<Vec<Complex64>> = (0..d)
        .map(|j| {
            let mut col = vec![Complex64::new(0.0, 0.0); joint_dim];
            for (k, root) in roots.iter().enumerate() {
                for i in 0..d {
                    col[i * n + k] = root.get(i, j);
                }
            }
            col
        })
        .collect();

    // Gram-Schmidt completion to an orthonormal basis of the joint space.
    let dot = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    };
    for col in &mut columns {
        let norm = dot(col, col).re.sqrt();
        if (norm - 1.0).abs() > 1e-7 {
            return Err(Error::NumericalFailure(format!(
                "dilation isometry column norm {norm}"
            )));
        }
        for v in col.iter_mut() {
            *v /= Complex64::new(norm, 0.0);
        }
    }
    let mut extra = Vec::new();
    for seed in 0..joint_dim {
        if columns.len() + extra.len() == joint_dim {
            break;
        }
        let mut cand = vec![Complex64::new(0.0, 0.0); joint_dim];
        cand[seed] = Complex64::new(1.0, 0.0);
        for basis in columns.iter().chain(extra.iter()) {
            let overlap = dot(basis, &cand);
            for (c, b) in cand.iter_mut().zip(basis) {
                *c -= overlap * b;
            }
        }
        let norm = dot(&cand, &cand).re.sqrt();
        if norm > 1e-6 {
            for v in cand.iter_mut() {
                *v /= Complex64::new(norm, 0.0);
            }
            extra.push(cand);
        }
    }
    if columns.len() + extra.len() != joint_dim {
        return Err(Error::NumericalFailure(
            "could not complete dilation isometry to a unitary".into(),
        ));
    }

    // Unitary with U (e_j (x) e_0) = V e_j: isometry columns sit at joint
    // column index j * n, the completion fills the rest.
    let mut u = ComplexMatrix::zeros(joint_dim);
    let mut extra_it = extra.into_iter();
    for col_idx in 0..joint_dim {
        let col = if col_idx % n == 0 {
            columns[col_idx / n].clone()
        } else {
            extra_it.next().expect("completion exhausted")
        };
        for (row, v) in col.into_iter().enumerate() {
            u.set(row, col_idx, v);
        }
    }

    // Joint projectors U^dag (I (x) |k><k|) U.
    let u_dag = u.adjoint();
    let id_s = ComplexMatrix::identity(d);
    let mut joint_effects = Vec::with_capacity(n);
    for k in 0..n {
        let anc = ComplexMatrix::outer(&basis_vector(n, k));
        let pi = HermitianOperator::new(u_dag.mul(&id_s.kron(&anc)).mul(&u))?;
        if !is_projector(&pi, TAU_SUM) {
            return Err(Error::NumericalFailure(format!(
                "dilation element {k} failed the projector test"
            )));
        }
        joint_effects.push(Effect::new(pi)?);
    }
    let ext = NaimarkExtension {
        system_dim: d,
        ancilla_dim: n,
        ancilla_state: DensityOperator::pure(&basis_vector(n, 0)),
        joint_pvm: Povm::with_labels(joint_effects, m.labels().to_vec())?,
    };

    let reduced = reduce(&ext.joint_pvm, &ext.ancilla_state, false)?;
    if !reduced.approx_eq(m, TAU_SUM) {
        return Err(Error::NumericalFailure(
            "dilation reduction residue exceeds tolerance".into(),
        ));
    }
    Ok(ext)
}

/// A sharp measurement plus binary stochastic post-processing whose
/// distinguished outcome realizes a given effect.
#[derive(Debug, Clone)]
pub struct SpectralRealization {
    /// The PVM of eigenspace projectors of the effect.
    pub pvm: Povm,
    /// Two-output map: s(j0 | i) = s_i, s(other | i) = 1 - s_i.
    pub map: StochasticMap,
    /// Index of the distinguished output (always 0 here).
    pub distinguished: usize,
    /// True iff some eigenvalue lies strictly inside (0, 1), i.e. the
    /// post-processing is irreducibly probabilistic.
    pub probabilistic: bool,
}

impl SpectralRealization {
    /// The POVM obtained by running the post-processing; its distinguished
    /// element reproduces the source effect.
    pub fn realized(&self) -> Result<Povm> {
        post_process(&self.pvm, &self.map)
    }
}

/// Realize an effect as a probabilistic post-processing of the sharp
/// measurement given by its eigenspace projectors.
pub fn spectral_realization(e: &Effect) -> Result<SpectralRealization> {
    let res = spectral_decompose(e.op(), TAU_DEGEN)?;
    let pvm = Povm::new(
        res.projectors
            .iter()
            .map(|p| Effect::new(p.clone()))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let s_row: Vec<f64> = res.eigenvalues.iter().map(|s| s.clamp(0.0, 1.0)).collect();
    let other_row: Vec<f64> = s_row.iter().map(|s| 1.0 - s).collect();
    let probabilistic = res
        .eigenvalues
        .iter()
        .any(|&s| s > TAU_EIG && s < 1.0 - TAU_EIG);
    Ok(SpectralRealization {
        pvm,
        map: StochasticMap::new(vec![s_row, other_row])?,
        distinguished: 0,
        probabilistic,
    })
}

/// A labelled preparation.
#[derive(Debug, Clone)]
pub struct Preparation {
    pub label: String,
    pub state: DensityOperator,
}

/// A labelled measurement with its sharpness classification.
#[derive(Debug, Clone)]
pub struct Measurement {
    pub label: String,
    pub povm: Povm,
    pub sharp: bool,
}

/// A finite operational theory: preparations, measurements, and the table
/// p(k|M,P).
///
/// The table is stored one row per measurement; within a row the entries run
/// preparation-major, outcome-minor, so `row[p * K_m + k] = p(k|M,P)`.
#[derive(Debug, Clone)]
pub struct OperationalTheory {
    dim: usize,
    preparations: Vec<Preparation>,
    measurements: Vec<Measurement>,
    table: Vec<Vec<f64>>,
}

impl OperationalTheory {
    pub fn from_parts(
        preparations: Vec<Preparation>,
        measurements: Vec<Measurement>,
    ) -> Result<Self> {
        if preparations.is_empty() || measurements.is_empty() {
            return Err(Error::InvalidTheory(
                "need at least one preparation and one measurement".into(),
            ));
        }
        let dim = preparations[0].state.dim();
        if preparations.iter().any(|p| p.state.dim() != dim)
            || measurements.iter().any(|m| m.povm.dim() != dim)
        {
            return Err(Error::DimensionMismatch(
                "preparations and measurements must share one dimension".into(),
            ));
        }
        let mut table = Vec::with_capacity(measurements.len());
        for m in &measurements {
            let mut row = Vec::with_capacity(preparations.len() * m.povm.len());
            for p in &preparations {
                for e in m.povm.effects() {
                    row.push(born(&p.state, e)?);
                }
            }
            table.push(row);
        }
        Ok(Self {
            dim,
            preparations,
            measurements,
            table,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn preparations(&self) -> &[Preparation] {
        &self.preparations
    }

    pub fn measurements(&self) -> &[Measurement] {
        &self.measurements
    }

    pub fn preparation_index(&self, label: &str) -> Option<usize> {
        self.preparations.iter().position(|p| p.label == label)
    }

    pub fn measurement_index(&self, label: &str) -> Option<usize> {
        self.measurements.iter().position(|m| m.label == label)
    }

    /// p(k | measurement m, preparation p).
    pub fn prob(&self, m: usize, p: usize, k: usize) -> f64 {
        self.table[m][p * self.measurements[m].povm.len() + k]
    }

    /// Full table row of one measurement (preparation-major, outcome-minor).
    pub fn measurement_row(&self, m: usize) -> &[f64] {
        &self.table[m]
    }

    /// Outcome distribution of measurement m on preparation p.
    pub fn distribution(&self, m: usize, p: usize) -> &[f64] {
        let k = self.measurements[m].povm.len();
        &self.table[m][p * k..(p + 1) * k]
    }

    /// Statistics of one preparation across every measurement, concatenated
    /// in measurement order.
    pub fn preparation_statistics(&self, p: usize) -> Vec<f64> {
        let mut out = Vec::new();
        for m in 0..self.measurements.len() {
            out.extend_from_slice(self.distribution(m, p));
        }
        out
    }

    /// Check normalization, range, and Born-rule agreement of the table.
    pub fn validate(&self, tau: f64) -> Result<()> {
        for (mi, m) in self.measurements.iter().enumerate() {
            for (pi, p) in self.preparations.iter().enumerate() {
                let dist = self.distribution(mi, pi);
                let total: f64 = dist.iter().sum();
                if (total - 1.0).abs() > TAU_SUM.max(tau) {
                    return Err(Error::InvalidTheory(format!(
                        "outcomes of measurement '{}' on preparation '{}' sum to {total}",
                        m.label, p.label
                    )));
                }
                for (k, &v) in dist.iter().enumerate() {
                    if !(-tau..=1.0 + tau).contains(&v) {
                        return Err(Error::InvalidTheory(format!(
                            "p({k}|{},{}) = {v} outside [0, 1]",
                            m.label, p.label
                        )));
                    }
                    let expected = born(&p.state, m.povm.effect(k))?;
                    if (v - expected).abs() > tau {
                        return Err(Error::InvalidTheory(format!(
                            "table entry p({k}|{},{}) = {v} disagrees with Born value {expected}",
                            m.label, p.label
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Assemble an operational theory from quantum objects. Labels are generated
/// as "P0", "P1", ... and "M0", "M1", ...; sharpness is classified per POVM.
pub fn build_quantum_theory(
    states: &[DensityOperator],
    povms: &[Povm],
) -> Result<OperationalTheory> {
    let preparations = states
        .iter()
        .enumerate()
        .map(|(i, s)| Preparation {
            label: format!("P{i}"),
            state: s.clone(),
        })
        .collect();
    let measurements = povms
        .iter()
        .enumerate()
        .map(|(i, m)| Measurement {
            label: format!("M{i}"),
            povm: m.clone(),
            sharp: m.is_sharp(TAU_SUM),
        })
        .collect();
    OperationalTheory::from_parts(preparations, measurements)
}

/// Certified-preparation structure for sharp measurements: every outcome of
/// every sharp measurement has a preparation making it (near-)certain, and the
/// uniform mixtures of those preparations are pairwise indistinguishable
/// across sharp measurements.
#[derive(Debug, Clone, Serialize)]
pub struct CertaintyReport {
    /// Sharp (measurement, outcome) pairs with no certifying preparation.
    pub missing: Vec<(String, usize)>,
    /// Pairs of sharp measurements whose certifying-preparation mixtures are
    /// statistically distinguishable, with the worst deviation.
    pub mixture_mismatches: Vec<(String, String, f64)>,
    /// Chosen certifying preparation per sharp (measurement, outcome).
    pub certificates: Vec<(String, usize, String)>,
}

impl CertaintyReport {
    pub fn holds(&self) -> bool {
        self.missing.is_empty() && self.mixture_mismatches.is_empty()
    }

    pub fn to_report(&self) -> Report {
        let mut r = Report::new("certified outcomes for sharp measurements");
        r.push(
            "every sharp outcome certified",
            self.missing.is_empty(),
            if self.missing.is_empty() {
                format!("{} certificates found", self.certificates.len())
            } else {
                format!("missing certificates: {:?}", self.missing)
            },
        );
        r.push(
            "certifying mixtures pairwise indistinguishable",
            self.mixture_mismatches.is_empty(),
            if self.mixture_mismatches.is_empty() {
                "all sharp-measurement mixtures agree".to_string()
            } else {
                format!("{:?}", self.mixture_mismatches)
            },
        );
        r.note(
            "indistinguishability is checked relative to the measurements listed in the theory, \
             not all conceivable measurements",
        );
        r
    }
}

/// Check the certified-outcome structure of a theory's sharp measurements
/// within tolerance `tau`.
pub fn verify_p1(theory: &OperationalTheory, tau: f64) -> CertaintyReport {
    let mut missing = Vec::new();
    let mut certificates = Vec::new();
    let mut mixtures: Vec<(String, Vec<f64>)> = Vec::new();

    for (mi, m) in theory.measurements().iter().enumerate() {
        if !m.sharp {
            continue;
        }
        let mut chosen = Vec::new();
        for k in 0..m.povm.len() {
            // Best certifying preparation for outcome k.
            let best = (0..theory.preparations().len())
                .map(|pi| (pi, theory.prob(mi, pi, k)))
                .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .expect("theory has preparations");
            if best.1 < 1.0 - tau {
                missing.push((m.label.clone(), k));
            } else {
                certificates.push((m.label.clone(), k, theory.preparations()[best.0].label.clone()));
                chosen.push(best.0);
            }
        }
        if chosen.len() == m.povm.len() {
            // Statistics of the uniform mixture of the certifying preparations.
            let stats: Vec<Vec<f64>> = chosen
                .iter()
                .map(|&pi| theory.preparation_statistics(pi))
                .collect();
            let len = stats[0].len();
            let mixture: Vec<f64> = (0..len)
                .map(|i| stats.iter().map(|s| s[i]).sum::<f64>() / stats.len() as f64)
                .collect();
            mixtures.push((m.label.clone(), mixture));
        }
    }

    let mut mixture_mismatches = Vec::new();
    for a in 0..mixtures.len() {
        for b in (a + 1)..mixtures.len() {
            let deviation = mixtures[a]
                .1
                .iter()
                .zip(&mixtures[b].1)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            if deviation > tau {
                mixture_mismatches.push((mixtures[a].0.clone(), mixtures[b].0.clone(), deviation));
            }
        }
    }

    CertaintyReport {
        missing,
        mixture_mismatches,
        certificates,
    }
}

// --- JSON schema ---

#[derive(Serialize, Deserialize)]
struct PreparationJson {
    label: String,
    rho: DensityOperator,
}

#[derive(Serialize, Deserialize)]
struct MeasurementJson {
    label: String,
    effects: Vec<Effect>,
    #[serde(default)]
    sharp: Option<bool>,
}

#[derive(Serialize, Deserialize)]
struct TheoryJson {
    dim: usize,
    preparations: Vec<PreparationJson>,
    measurements: Vec<MeasurementJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    table: Option<Vec<Vec<f64>>>,
}

impl Serialize for OperationalTheory {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        TheoryJson {
            dim: self.dim,
            preparations: self
                .preparations
                .iter()
                .map(|p| PreparationJson {
                    label: p.label.clone(),
                    rho: p.state.clone(),
                })
                .collect(),
            measurements: self
                .measurements
                .iter()
                .map(|m| MeasurementJson {
                    label: m.label.clone(),
                    effects: m.povm.effects().to_vec(),
                    sharp: Some(m.sharp),
                })
                .collect(),
            table: Some(self.table.clone()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for OperationalTheory {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = TheoryJson::deserialize(deserializer)?;
        let preparations = raw
            .preparations
            .into_iter()
            .map(|p| Preparation {
                label: p.label,
                state: p.rho,
            })
            .collect::<Vec<_>>();
        let measurements = raw
            .measurements
            .into_iter()
            .map(|m| {
                let povm = Povm::new(m.effects).map_err(D::Error::custom)?;
                let sharp = m.sharp.unwrap_or_else(|| povm.is_sharp(TAU_SUM));
                Ok(Measurement {
                    label: m.label,
                    povm,
                    sharp,
                })
            })
            .collect::<std::result::Result<Vec<_>, D::Error>>()?;
        let theory =
            OperationalTheory::from_parts(preparations, measurements).map_err(D::Error::custom)?;
        if theory.dim != raw.dim {
            return Err(D::Error::custom(format!(
                "declared dim {} but operators have dim {}",
                raw.dim, theory.dim
            )));
        }
        if let Some(table) = raw.table {
            // A supplied table must match the Born-rule table.
            if table.len() != theory.table.len()
                || table
                    .iter()
                    .zip(&theory.table)
                    .any(|(a, b)| a.len() != b.len())
            {
                return Err(D::Error::custom("table shape mismatch"));
            }
            for (supplied, computed) in table.iter().flatten().zip(theory.table.iter().flatten()) {
                if (supplied - computed).abs() > TAU_TRACE {
                    return Err(D::Error::custom(format!(
                        "table entry {supplied} disagrees with Born value {computed}"
                    )));
                }
            }
        }
        Ok(theory)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::basis_vector;

    fn fair_coin() -> Povm {
        let half = Effect::new(HermitianOperator::identity(2).scale(0.5)).unwrap();
        Povm::new(vec![half.clone(), half]).unwrap()
    }

    fn z_pvm() -> Povm {
        Povm::new(vec![
            Effect::new(HermitianOperator::projector_onto(&basis_vector(2, 0))).unwrap(),
            Effect::new(HermitianOperator::projector_onto(&basis_vector(2, 1))).unwrap(),
        ])
        .unwrap()
    }

    fn x_pvm() -> Povm {
        let plus = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        let minus = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
        Povm::new(vec![
            Effect::new(HermitianOperator::projector_onto(&plus)).unwrap(),
            Effect::new(HermitianOperator::projector_onto(&minus)).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn povm_rejects_bad_sum() {
        let half = Effect::new(HermitianOperator::identity(2).scale(0.5)).unwrap();
        assert!(matches!(
            Povm::new(vec![half]),
            Err(Error::NotResolution { .. })
        ));
    }

    #[test]
    fn post_process_uniform_mixing() {
        let s = StochasticMap::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let out = post_process(&z_pvm(), &s).unwrap();
        assert!(out.approx_eq(&fair_coin(), 1e-12));
    }

    #[test]
    fn post_process_identity_map() {
        let m = z_pvm();
        let out = post_process(&m, &StochasticMap::identity(2)).unwrap();
        assert!(out.approx_eq(&m, 1e-12));
    }

    #[test]
    fn post_process_spectral_construction() {
        // PVM of diag(0.7, 0.2)'s eigenspaces with s(j0|i) = s_i yields a POVM
        // containing diag(0.7, 0.2) itself.
        let target = HermitianOperator::diag(&[0.7, 0.2]);
        let pvm = Povm::new(vec![
            Effect::new(HermitianOperator::diag(&[1.0, 0.0])).unwrap(),
            Effect::new(HermitianOperator::diag(&[0.0, 1.0])).unwrap(),
        ])
        .unwrap();
        let s = StochasticMap::new(vec![vec![0.7, 0.2], vec![0.3, 0.8]]).unwrap();
        let out = post_process(&pvm, &s).unwrap();
        assert!(out.effect(0).op().approx_eq(&target, 1e-12));
    }

    #[test]
    fn post_process_composition_law() {
        let m = z_pvm();
        let s = StochasticMap::new(vec![vec![0.7, 0.2], vec![0.3, 0.8]]).unwrap();
        let t = StochasticMap::new(vec![vec![0.1, 0.9], vec![0.9, 0.1]]).unwrap();
        let staged = post_process(&post_process(&m, &s).unwrap(), &t).unwrap();
        let fused = post_process(&m, &t.compose(&s).unwrap()).unwrap();
        assert!(staged.approx_eq(&fused, 1e-12));
    }

    #[test]
    fn coarse_grain_matches_indicator_post_processing() {
        let p = 1.0 / 3.0;
        let q = 1.0 / 4.0;
        let id = HermitianOperator::identity(2);
        let paradox = Povm::new(vec![
            Effect::new(id.scale(p / 2.0)).unwrap(),
            Effect::new(id.scale((1.0 - p) / 2.0)).unwrap(),
            Effect::new(id.scale(q / 2.0)).unwrap(),
            Effect::new(id.scale((1.0 - q) / 2.0)).unwrap(),
        ])
        .unwrap();
        let partition = vec![
            vec!["0".to_string(), "1".to_string()],
            vec!["2".to_string()],
            vec!["3".to_string()],
        ];
        let grained = coarse_grain(&paradox, &partition).unwrap();
        assert!(grained.effect(0).op().approx_eq(&id.scale(0.5), 1e-12));
        assert!(grained.effect(1).op().approx_eq(&id.scale(q / 2.0), 1e-12));

        // Same result through the indicator stochastic map.
        let s = StochasticMap::new(vec![
            vec![1.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ])
        .unwrap();
        let via_map = post_process(&paradox, &s).unwrap();
        assert!(grained.approx_eq(&via_map, 1e-12));
    }

    #[test]
    fn coarse_grain_edges() {
        let m = z_pvm();
        let all = coarse_grain(&m, &[vec!["0".into(), "1".into()]]).unwrap();
        assert_eq!(all.len(), 1);
        assert!(all
            .effect(0)
            .op()
            .approx_eq(&HermitianOperator::identity(2), 1e-12));

        let singleton = coarse_grain(&m, &[vec!["0".into()], vec!["1".into()]]).unwrap();
        assert!(singleton.approx_eq(&m, 1e-12));

        assert!(matches!(
            coarse_grain(&m, &[vec!["0".into()]]),
            Err(Error::InvalidPartition(_))
        ));
        assert!(matches!(
            coarse_grain(&m, &[vec!["0".into(), "0".into()], vec!["1".into()]]),
            Err(Error::InvalidPartition(_))
        ));
    }

    #[test]
    fn convex_mix_cases() {
        let z = z_pvm();
        let x = x_pvm();
        let first = convex_mix(&[z.clone(), x.clone()], &[1.0, 0.0]).unwrap();
        assert!(first.approx_eq(&z, 1e-12));

        let with_self = convex_mix(&[z.clone(), z.clone()], &[0.3, 0.7]).unwrap();
        assert!(with_self.approx_eq(&z, 1e-12));

        // Equal Z/X mixture is not projective: verified by direct squaring.
        let mixed = convex_mix(&[z, x], &[0.5, 0.5]).unwrap();
        for e in mixed.effects() {
            let sq = e.op().matrix().mul(e.op().matrix());
            assert!(sq.sub(e.op().matrix()).max_abs() > 0.1);
            assert!(!is_projector(e.op(), 1e-9));
        }

        assert!(matches!(
            convex_mix(&[fair_coin()], &[0.5]),
            Err(Error::WeightError(_))
        ));
    }

    #[test]
    fn reduce_by_direct_partial_trace() {
        // Pi (x) |0><0| + (I - Pi) (x) (I - |0><0|) style block measurement
        // with the ancilla pinned to |0> recovers {Pi, I - Pi}.
        let pi = HermitianOperator::projector_onto(&basis_vector(2, 0));
        let co = HermitianOperator::identity(2).sub(&pi);
        let anc0 = HermitianOperator::projector_onto(&basis_vector(2, 0));
        let anc1 = HermitianOperator::identity(2).sub(&anc0);
        let joint = Povm::new(vec![
            Effect::new(pi.kron(&anc0).add(&co.kron(&anc1))).unwrap(),
            Effect::new(pi.kron(&anc1).add(&co.kron(&anc0))).unwrap(),
        ])
        .unwrap();
        let reduced = reduce(&joint, &DensityOperator::pure(&basis_vector(2, 0)), false).unwrap();
        assert!(reduced.effect(0).op().approx_eq(&pi, 1e-12));
        assert!(reduced.effect(1).op().approx_eq(&co, 1e-12));

        // Independent check of the same partial trace, entry by entry.
        let e0 = joint.effect(0).op();
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = Complex64::new(0.0, 0.0);
                for a in 0..2 {
                    // ancilla state |0><0|: only the a = b = 0 term survives
                    acc += if a == 0 {
                        e0.get(i * 2, j * 2)
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                }
                assert!((acc - reduced.effect(0).op().get(i, j)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn fair_coin_pair_reduces_and_distinguishes() {
        let (ext1, ext2) = fair_coin_naimark_pair();
        let coin = fair_coin();
        ext1.verify(&coin, false, 1e-9).unwrap();
        ext2.verify(&coin, true, 1e-9).unwrap();

        // Third reduced effect of the second extension is exactly zero.
        let reduced2 = reduce(&ext2.joint_pvm, &ext2.ancilla_state, false).unwrap();
        assert_eq!(reduced2.len(), 3);
        assert!(reduced2.effect(2).op().matrix().max_abs() < 1e-15);

        // Joint state (I/2) (x) |2><2| separates the two extensions.
        let anc = HermitianOperator::projector_onto(&basis_vector(3, 2));
        let joint_state = DensityOperator::new(
            HermitianOperator::identity(2).scale(0.5).kron(&anc),
        )
        .unwrap();
        let stats1 = ext1.joint_statistics(&joint_state).unwrap();
        assert!((stats1[0] - 0.5).abs() < 1e-9 && (stats1[1] - 0.5).abs() < 1e-9);
        let stats2 = ext2.joint_statistics(&joint_state).unwrap();
        assert!(stats2[0].abs() < 1e-9 && stats2[1].abs() < 1e-9);
        assert!((stats2[2] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn naimark_extend_round_trips() {
        for m in [z_pvm(), fair_coin(), trine_povm()] {
            let ext = naimark_extend(&m).unwrap();
            ext.verify(&m, false, 1e-9).unwrap();
            let reduced = reduce(&ext.joint_pvm, &ext.ancilla_state, false).unwrap();
            for (a, b) in reduced.effects().iter().zip(m.effects()) {
                assert!(a.op().approx_eq(b.op(), 1e-9));
            }
        }
    }

    fn trine_povm() -> Povm {
        let trine = trine_projectors();
        Povm::new(
            trine
                .iter()
                .map(|p| Effect::new(p.scale(2.0 / 3.0)).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn spectral_realization_cases() {
        // I/2: single eigenspace, map value 1/2, irreducibly probabilistic.
        let half = Effect::new(HermitianOperator::identity(2).scale(0.5)).unwrap();
        let real = spectral_realization(&half).unwrap();
        assert_eq!(real.pvm.len(), 1);
        assert!((real.map.get(0, 0) - 0.5).abs() < 1e-12);
        assert!(real.probabilistic);
        let povm = real.realized().unwrap();
        assert!(povm.effect(0).op().approx_eq(half.op(), 1e-12));

        // Projector: deterministic map, witness false.
        let proj = Effect::new(HermitianOperator::projector_onto(&basis_vector(2, 0))).unwrap();
        let real = spectral_realization(&proj).unwrap();
        assert!(!real.probabilistic);
        for i in 0..real.pvm.len() {
            let s = real.map.get(0, i);
            assert!(s.abs() < 1e-9 || (s - 1.0).abs() < 1e-9);
        }
        assert!(real
            .realized()
            .unwrap()
            .effect(0)
            .op()
            .approx_eq(proj.op(), 1e-12));

        // diag(0.7, 0.2) reconstructs through the stated map.
        let e = Effect::new(HermitianOperator::diag(&[0.7, 0.2])).unwrap();
        let real = spectral_realization(&e).unwrap();
        assert_eq!(real.pvm.len(), 2);
        assert!((real.map.get(0, 0) - 0.7).abs() < 1e-12);
        assert!((real.map.get(0, 1) - 0.2).abs() < 1e-12);
        assert!(real
            .realized()
            .unwrap()
            .effect(0)
            .op()
            .approx_eq(e.op(), 1e-12));
    }

    #[test]
    fn quantum_theory_table() {
        let theory = build_quantum_theory(
            &[DensityOperator::maximally_mixed(2)],
            &[fair_coin()],
        )
        .unwrap();
        assert_eq!(theory.measurement_row(0), &[0.5, 0.5]);
        assert!(!theory.measurements()[0].sharp);
        theory.validate(1e-9).unwrap();

        // Eigenbasis preparations against their own PVM give a 0/1 row.
        let states = [
            DensityOperator::pure(&basis_vector(2, 0)),
            DensityOperator::pure(&basis_vector(2, 1)),
        ];
        let theory = build_quantum_theory(&states, &[z_pvm()]).unwrap();
        assert!(theory.measurements()[0].sharp);
        for p in 0..2 {
            for k in 0..2 {
                let expected = if p == k { 1.0 } else { 0.0 };
                assert!((theory.prob(0, p, k) - expected).abs() < 1e-12);
            }
        }

        // Trine on the maximally mixed state: uniform thirds.
        let theory =
            build_quantum_theory(&[DensityOperator::maximally_mixed(2)], &[trine_povm()]).unwrap();
        for k in 0..3 {
            assert!((theory.prob(0, 0, k) - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn p1_holds_for_z_x_eigenstate_theory() {
        let plus = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        let minus = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
        let states = [
            DensityOperator::pure(&basis_vector(2, 0)),
            DensityOperator::pure(&basis_vector(2, 1)),
            DensityOperator::pure(&plus),
            DensityOperator::pure(&minus),
        ];
        let theory = build_quantum_theory(&states, &[z_pvm(), x_pvm()]).unwrap();
        let report = verify_p1(&theory, 1e-9);
        assert!(report.holds(), "{:?}", report);
    }

    #[test]
    fn p1_fails_without_eigenstates() {
        let theory = build_quantum_theory(
            &[DensityOperator::maximally_mixed(2)],
            &[z_pvm()],
        )
        .unwrap();
        let report = verify_p1(&theory, 1e-9);
        assert!(!report.holds());
        assert_eq!(report.missing.len(), 2);
    }

    #[test]
    fn p1_single_measurement_vacuous_pairwise() {
        let states = [
            DensityOperator::pure(&basis_vector(2, 0)),
            DensityOperator::pure(&basis_vector(2, 1)),
        ];
        let theory = build_quantum_theory(&states, &[z_pvm()]).unwrap();
        let report = verify_p1(&theory, 1e-9);
        assert!(report.holds());
        assert!(report.mixture_mismatches.is_empty());
    }

    #[test]
    fn theory_json_round_trip() {
        let theory = build_quantum_theory(
            &[DensityOperator::maximally_mixed(2)],
            &[fair_coin(), z_pvm()],
        )
        .unwrap();
        let text = serde_json::to_string(&theory).unwrap();
        let back: OperationalTheory = serde_json::from_str(&text).unwrap();
        assert_eq!(back.measurement_row(0), theory.measurement_row(0));
        assert!(!back.measurements()[0].sharp);
        assert!(back.measurements()[1].sharp);

        // Table omitted: recomputed from the Born rule.
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v.as_object_mut().unwrap().remove("table");
        let back: OperationalTheory = serde_json::from_value(v).unwrap();
        assert_eq!(back.measurement_row(0), theory.measurement_row(0));

        // A lying table is rejected.
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["table"][0][0] = serde_json::json!(0.9);
        assert!(serde_json::from_value::<OperationalTheory>(v).is_err());
    }
}
