//! Discrete Wigner model for a single-qutrit stabilizer fragment.
//!
//! The nine phase-point operators over Z3 x Z3 define a quasiprobability
//! representation. On the fragment built from the four Pauli bases the
//! representation is nonnegative, so it doubles as an ontological model with
//! the phase points as ontic states: mu = tr(rho A(u))/3 and xi_E = tr(E A(u)).
//! The model is exactly adequate, noncontextual, and represents a measurement
//! deterministically precisely when the measurement is sharp.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Error;
use crate::measurement::{convex_mix, Measurement, OperationalTheory, Povm, Preparation};
use crate::ontology::{
    check_measurement_noncontextual, check_preparation_noncontextual, empirical_adequacy,
    verify_determinism_iff_sharp, AdequacyReport, DeterminismSharpReport, MeasurementNcReport,
    OntologicalModel, PreparationNcReport,
};
use crate::operator::{hs_inner, ComplexMatrix, DensityOperator, Effect, HermitianOperator};
use crate::report::Report;
use crate::tol::{TAU_SUM, TAU_TRACE};
use crate::Result;

const DIM: usize = 3;

/// A point (q, p) of the 3 x 3 discrete phase space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PhasePoint {
    pub q: u8,
    pub p: u8,
}

impl PhasePoint {
    pub fn new(q: u8, p: u8) -> Self {
        assert!(q < 3 && p < 3, "phase-space components live in Z3");
        Self { q, p }
    }

    pub fn index(self) -> usize {
        self.q as usize * DIM + self.p as usize
    }

    pub fn all() -> impl Iterator<Item = PhasePoint> {
        (0..9).map(|i| PhasePoint {
            q: (i / DIM) as u8,
            p: (i % DIM) as u8,
        })
    }

    pub fn label(self) -> String {
        format!("({},{})", self.q, self.p)
    }
}

fn omega(power: i64) -> Complex64 {
    let theta = 2.0 * std::f64::consts::PI * (power.rem_euclid(3) as f64) / 3.0;
    Complex64::new(theta.cos(), theta.sin())
}

/// Cyclic shift X |j> = |j+1 mod 3>.
pub fn shift_op() -> ComplexMatrix {
    ComplexMatrix::from_fn(DIM, |i, j| {
        if i == (j + 1) % DIM {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Clock Z |j> = w^j |j>.
pub fn clock_op() -> ComplexMatrix {
    ComplexMatrix::from_fn(DIM, |i, j| {
        if i == j {
            omega(j as i64)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

fn mat_pow(m: &ComplexMatrix, n: usize) -> ComplexMatrix {
    let mut acc = ComplexMatrix::identity(m.dim());
    for _ in 0..n {
        acc = acc.mul(m);
    }
    acc
}

/// The nine phase-point operators A(u), one per point of Z3 x Z3.
#[derive(Debug, Clone)]
pub struct PhasePointOperatorSet {
    ops: Vec<HermitianOperator>,
}

impl PhasePointOperatorSet {
    pub fn get(&self, u: PhasePoint) -> &HermitianOperator {
        &self.ops[u.index()]
    }

    pub fn ops(&self) -> &[HermitianOperator] {
        &self.ops
    }
}

/// Construct the phase-point operators: the parity operator A(0,0)|j> = |-j>
/// displaced by the shift/clock Weyl operators, A(q,p) = X^q Z^p A(0,0)
/// (X^q Z^p)^dag. All defining invariants are verified before returning:
/// Hermiticity, unit trace, tr(A(u)A(v)) = 3 delta_uv, and sum_u A(u) = 3I.
pub fn phase_point_operators() -> Result<PhasePointOperatorSet> {
    let parity = ComplexMatrix::from_fn(DIM, |i, j| {
        if i == (DIM - j) % DIM {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let x = shift_op();
    let z = clock_op();
    let mut ops = Vec::with_capacity(9);
    for u in PhasePoint::all() {
        let w = mat_pow(&x, u.q as usize).mul(&mat_pow(&z, u.p as usize));
        let a = w.mul(&parity).mul(&w.adjoint());
        let op = HermitianOperator::new(a).map_err(|e| {
            Error::ConstructionFailure(format!("phase-point operator {}: {e}", u.label()))
        })?;
        ops.push(op);
    }

    for (i, a) in ops.iter().enumerate() {
        let tr = a.matrix().trace();
        if (tr.re - 1.0).abs() > TAU_TRACE || tr.im.abs() > TAU_TRACE {
            return Err(Error::ConstructionFailure(format!(
                "phase-point operator {i} has trace {tr}"
            )));
        }
        for (j, b) in ops.iter().enumerate() {
            let inner = hs_inner(a, b)?;
            let expected = if i == j { 3.0 } else { 0.0 };
            if (inner - expected).abs() > TAU_TRACE {
                return Err(Error::ConstructionFailure(format!(
                    "tr(A_{i} A_{j}) = {inner}, expected {expected}"
                )));
            }
        }
    }
    let mut total = HermitianOperator::zeros(DIM);
    for a in &ops {
        total = total.add(a);
    }
    if !total.approx_eq(&HermitianOperator::identity(DIM).scale(3.0), TAU_SUM) {
        return Err(Error::ConstructionFailure(
            "phase-point operators do not sum to 3I".into(),
        ));
    }
    Ok(PhasePointOperatorSet { ops })
}

/// A real function over the nine phase points.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseSpaceFunction {
    values: Vec<f64>,
}

impl PhaseSpaceFunction {
    pub fn value(&self, u: PhasePoint) -> f64 {
        self.values[u.index()]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Wigner distribution W_rho(u) = tr(rho A(u)) / 3; sums to one.
pub fn wigner_distribution(
    aset: &PhasePointOperatorSet,
    rho: &DensityOperator,
) -> Result<PhaseSpaceFunction> {
    if rho.dim() != DIM {
        return Err(Error::DimensionMismatch(format!(
            "expected a qutrit state, got dimension {}",
            rho.dim()
        )));
    }
    let values: Vec<f64> = aset
        .ops
        .iter()
        .map(|a| hs_inner(rho.op(), a).map(|v| v / 3.0))
        .collect::<Result<_>>()?;
    let total: f64 = values.iter().sum();
    if (total - 1.0).abs() > TAU_SUM {
        return Err(Error::NumericalFailure(format!(
            "Wigner distribution sums to {total}"
        )));
    }
    Ok(PhaseSpaceFunction { values })
}

/// Wigner response xi_E(u) = tr(E A(u)); lands in [0, 1] for fragment
/// effects (not clamped, so representability failures stay visible).
pub fn wigner_response(aset: &PhasePointOperatorSet, e: &Effect) -> Result<PhaseSpaceFunction> {
    if e.dim() != DIM {
        return Err(Error::DimensionMismatch(format!(
            "expected a qutrit effect, got dimension {}",
            e.dim()
        )));
    }
    let values = aset
        .ops
        .iter()
        .map(|a| hs_inner(e.op(), a))
        .collect::<Result<_>>()?;
    Ok(PhaseSpaceFunction { values })
}

/// The four order-3 Pauli unitaries whose eigenbases are the fragment's
/// sharp measurements, with their labels.
fn pauli_unitaries() -> Vec<(String, ComplexMatrix)> {
    let x = shift_op();
    let z = clock_op();
    vec![
        ("Z".into(), z.clone()),
        ("X".into(), x.clone()),
        ("XZ".into(), x.mul(&z)),
        ("XZZ".into(), x.mul(&z).mul(&z)),
    ]
}

/// Rank-1 eigenprojectors of an order-3 unitary: P_k = (1/3) sum_m w^{-km} U^m.
fn eigenbasis_projectors(u: &ComplexMatrix) -> Result<Vec<HermitianOperator>> {
    let mut out = Vec::with_capacity(3);
    for k in 0..3i64 {
        let mut acc = ComplexMatrix::zeros(DIM);
        for m in 0..3usize {
            acc = acc.add(&mat_pow(u, m).scale(omega(-k * m as i64).unscale(3.0)));
        }
        out.push(HermitianOperator::new(acc)?);
    }
    Ok(out)
}

/// The maximally negative qutrit state (|1> - |2>)/sqrt(2): its Wigner
/// distribution reaches -1/3, witnessing the boundary of the fragment.
pub fn strange_state() -> DensityOperator {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DensityOperator::pure(&[
        Complex64::new(0.0, 0.0),
        Complex64::new(s, 0.0),
        Complex64::new(-s, 0.0),
    ])
}

/// The single-qutrit stabilizer fragment: 12 pure stabilizer states plus the
/// maximally mixed state; the 4 Pauli basis PVMs as sharp measurements; and
/// the 6 pairwise equal-weight mixtures of those PVMs as unsharp
/// measurements. Outcomes of each basis are labelled by eigenvalue index, so
/// mixtures align outcome k with outcome k.
pub fn stabilizer_fragment() -> Result<OperationalTheory> {
    let bases = pauli_unitaries();
    let mut preparations = Vec::new();
    let mut pvms = Vec::new();
    for (name, u) in &bases {
        let projectors = eigenbasis_projectors(u)?;
        for (k, p) in projectors.iter().enumerate() {
            preparations.push(Preparation {
                label: format!("{name}{k}"),
                state: DensityOperator::new(p.clone())?,
            });
        }
        pvms.push((
            name.clone(),
            Povm::new(
                projectors
                    .into_iter()
                    .map(Effect::new)
                    .collect::<Result<Vec<_>>>()?,
            )?,
        ));
    }
    preparations.push(Preparation {
        label: "mix".into(),
        state: DensityOperator::maximally_mixed(DIM),
    });

    let mut measurements = Vec::new();
    for (name, povm) in &pvms {
        measurements.push(Measurement {
            label: name.clone(),
            povm: povm.clone(),
            sharp: true,
        });
    }
    for i in 0..pvms.len() {
        for j in (i + 1)..pvms.len() {
            let mixed = convex_mix(
                &[pvms[i].1.clone(), pvms[j].1.clone()],
                &[0.5, 0.5],
            )?;
            measurements.push(Measurement {
                label: format!("{}+{}", pvms[i].0, pvms[j].0),
                povm: mixed,
                sharp: false,
            });
        }
    }
    OperationalTheory::from_parts(preparations, measurements)
}

/// Assemble the ontological model carried by the Wigner representation: the
/// nine phase points as ontic states, Wigner distributions as epistemic
/// states, Wigner responses as response functions.
pub fn wigner_model(
    aset: &PhasePointOperatorSet,
    theory: &OperationalTheory,
) -> Result<OntologicalModel> {
    let labels: Vec<String> = PhasePoint::all().map(|u| u.label()).collect();
    let mut model = OntologicalModel::new(labels);
    for p in theory.preparations() {
        let w = wigner_distribution(aset, &p.state)?;
        model.insert_epistemic(p.label.clone(), w.values().to_vec())?;
    }
    for m in theory.measurements() {
        let rows = m
            .povm
            .effects()
            .iter()
            .map(|e| Ok(wigner_response(aset, e)?.values().to_vec()))
            .collect::<Result<Vec<_>>>()?;
        model.insert_responses(m.label.clone(), rows)?;
    }
    Ok(model)
}

/// Aggregated verdicts for the fragment's noncontextual model.
#[derive(Debug, Clone, Serialize)]
pub struct FragmentVerification {
    pub preparations: usize,
    pub measurements: usize,
    pub adequacy: AdequacyReport,
    pub min_epistemic_weight: f64,
    pub min_response: f64,
    pub max_response: f64,
    pub measurement_nc: MeasurementNcReport,
    pub preparation_nc: PreparationNcReport,
    pub determinism: DeterminismSharpReport,
    pub certainty: crate::measurement::CertaintyReport,
    /// Most negative Wigner weight of the added non-stabilizer state.
    pub magic_state_min_weight: f64,
}

impl FragmentVerification {
    pub fn holds(&self) -> bool {
        self.adequacy.holds()
            && self.min_epistemic_weight >= -1e-9
            && self.min_response >= -1e-9
            && self.max_response <= 1.0 + 1e-9
            && self.measurement_nc.holds()
            && self.preparation_nc.holds()
            && self.determinism.holds()
            && self.certainty.holds()
            && self.magic_state_min_weight < -1e-3
    }

    pub fn to_report(&self) -> Report {
        let mut r = Report::new("qutrit stabilizer fragment model");
        r.push(
            "fragment size",
            self.preparations == 13 && self.measurements == 10,
            format!(
                "{} preparations, {} measurements",
                self.preparations, self.measurements
            ),
        );
        r.push(
            "empirical adequacy",
            self.adequacy.holds(),
            format!(
                "{} entries, max residual {:.3e}",
                self.adequacy.checked, self.adequacy.max_residual
            ),
        );
        r.push(
            "epistemic states nonnegative",
            self.min_epistemic_weight >= -1e-9,
            format!("min weight {:.3e}", self.min_epistemic_weight),
        );
        r.push(
            "responses within [0, 1]",
            self.min_response >= -1e-9 && self.max_response <= 1.0 + 1e-9,
            format!("range [{:.3e}, {}]", self.min_response, self.max_response),
        );
        r.push(
            "measurement noncontextuality",
            self.measurement_nc.holds(),
            format!("{} violations", self.measurement_nc.violations.len()),
        );
        r.push(
            "preparation noncontextuality",
            self.preparation_nc.holds(),
            format!("{} violations", self.preparation_nc.violations.len()),
        );
        r.push(
            "determinism exactly for sharp measurements",
            self.determinism.holds(),
            format!("{} measurements checked", self.determinism.checked),
        );
        r.push(
            "certified outcomes for sharp measurements",
            self.certainty.holds(),
            format!("{} certificates", self.certainty.certificates.len()),
        );
        r.push(
            "non-stabilizer state breaks nonnegativity",
            self.magic_state_min_weight < -1e-3,
            format!(
                "min Wigner weight of the added state: {:.6}",
                self.magic_state_min_weight
            ),
        );
        r.note(
            "unsharp fragment members are the pairwise equal mixtures of the four Pauli bases",
        );
        r
    }
}

/// Build the fragment, attach the Wigner model, and run every check:
/// adequacy, nonnegativity, both noncontextuality checks, certified
/// outcomes, determinism-iff-sharp, and the non-stabilizer boundary witness.
pub fn verify_subtheory_noncontextual_model() -> Result<FragmentVerification> {
    let aset = phase_point_operators()?;
    let theory = stabilizer_fragment()?;
    let model = wigner_model(&aset, &theory)?;

    let adequacy = empirical_adequacy(&model, &theory, 1e-9)?;
    let mut min_mu = f64::INFINITY;
    for p in theory.preparations() {
        for &v in model.epistemic(&p.label).expect("inserted above") {
            min_mu = min_mu.min(v);
        }
    }
    let mut min_xi = f64::INFINITY;
    let mut max_xi = f64::NEG_INFINITY;
    for m in theory.measurements() {
        for row in model.responses(&m.label).expect("inserted above") {
            for &v in row {
                min_xi = min_xi.min(v);
                max_xi = max_xi.max(v);
            }
        }
    }

    let measurement_nc = check_measurement_noncontextual(&model, &theory, 1e-9, 1e-9)?;
    let preparation_nc = check_preparation_noncontextual(&model, &theory, 1e-9, 1e-9)?;
    let determinism = verify_determinism_iff_sharp(&model, &theory, 1e-9)?;
    let certainty = crate::measurement::verify_p1(&theory, 1e-9);
    let magic = wigner_distribution(&aset, &strange_state())?;

    Ok(FragmentVerification {
        preparations: theory.preparations().len(),
        measurements: theory.measurements().len(),
        adequacy,
        min_epistemic_weight: min_mu,
        min_response: min_xi,
        max_response: max_xi,
        measurement_nc,
        preparation_nc,
        determinism,
        certainty,
        magic_state_min_weight: magic.min(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{basis_vector, born, is_projector};

    #[test]
    fn phase_point_invariants() {
        let aset = phase_point_operators().unwrap();
        for a in aset.ops() {
            let tr = a.matrix().trace();
            assert!((tr.re - 1.0).abs() < 1e-12 && tr.im.abs() < 1e-12);
        }
        for (i, a) in aset.ops().iter().enumerate() {
            for (j, b) in aset.ops().iter().enumerate() {
                let inner = hs_inner(a, b).unwrap();
                let expected = if i == j { 3.0 } else { 0.0 };
                assert!((inner - expected).abs() < 1e-12, "pair ({i},{j})");
            }
        }
        let mut total = HermitianOperator::zeros(3);
        for a in aset.ops() {
            total = total.add(a);
        }
        assert!(total.approx_eq(&HermitianOperator::identity(3).scale(3.0), 1e-12));
    }

    #[test]
    fn maximally_mixed_is_uniform() {
        let aset = phase_point_operators().unwrap();
        let w = wigner_distribution(&aset, &DensityOperator::maximally_mixed(3)).unwrap();
        for u in PhasePoint::all() {
            assert!((w.value(u) - 1.0 / 9.0).abs() < 1e-12);
        }
    }

    #[test]
    fn z_eigenstate_lives_on_a_line() {
        let aset = phase_point_operators().unwrap();
        let z0 = DensityOperator::pure(&basis_vector(3, 0));
        let w = wigner_distribution(&aset, &z0).unwrap();
        let mut thirds = 0;
        for u in PhasePoint::all() {
            let v = w.value(u);
            if (v - 1.0 / 3.0).abs() < 1e-12 {
                thirds += 1;
            } else {
                assert!(v.abs() < 1e-12, "value {v} at {}", u.label());
            }
        }
        assert_eq!(thirds, 3);
    }

    #[test]
    fn strange_state_goes_negative() {
        let aset = phase_point_operators().unwrap();
        let w = wigner_distribution(&aset, &strange_state()).unwrap();
        assert!(w.min() < -0.32 && w.min() > -0.34);
    }

    #[test]
    fn responses_of_pauli_projectors_are_indicators() {
        let aset = phase_point_operators().unwrap();
        let id = Effect::identity(3);
        let resp = wigner_response(&aset, &id).unwrap();
        for u in PhasePoint::all() {
            assert!((resp.value(u) - 1.0).abs() < 1e-12);
        }

        let z0 = Effect::new(HermitianOperator::projector_onto(&basis_vector(3, 0))).unwrap();
        let resp = wigner_response(&aset, &z0).unwrap();
        let ones = PhasePoint::all()
            .filter(|&u| (resp.value(u) - 1.0).abs() < 1e-12)
            .count();
        let zeros = PhasePoint::all()
            .filter(|&u| resp.value(u).abs() < 1e-12)
            .count();
        assert_eq!((ones, zeros), (3, 6));
    }

    #[test]
    fn mixed_basis_response_is_half_integer() {
        let aset = phase_point_operators().unwrap();
        let bases = pauli_unitaries();
        let z = eigenbasis_projectors(&bases[0].1).unwrap();
        let x = eigenbasis_projectors(&bases[1].1).unwrap();
        let e = Effect::new(z[0].scale(0.5).add(&x[0].scale(0.5))).unwrap();
        let resp = wigner_response(&aset, &e).unwrap();
        for u in PhasePoint::all() {
            let v = resp.value(u);
            let nearest = [0.0, 0.5, 1.0]
                .iter()
                .map(|t| (v - t).abs())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-12, "value {v}");
        }
    }

    #[test]
    fn eigenbasis_projectors_are_rank_one_resolutions() {
        for (name, u) in pauli_unitaries() {
            let projs = eigenbasis_projectors(&u).unwrap();
            let mut sum = HermitianOperator::zeros(3);
            for p in &projs {
                assert!(is_projector(p, 1e-9), "basis {name}");
                let tr = p.matrix().trace();
                assert!((tr.re - 1.0).abs() < 1e-9, "basis {name} rank");
                sum = sum.add(p);
            }
            assert!(sum.approx_eq(&HermitianOperator::identity(3), 1e-9));
        }
    }

    #[test]
    fn fragment_counts_and_rows() {
        let theory = stabilizer_fragment().unwrap();
        assert_eq!(theory.preparations().len(), 13);
        assert_eq!(theory.measurements().len(), 10);

        // Sharp rows on own eigenstates are 0/1 permutation rows.
        for (mi, m) in theory.measurements().iter().enumerate().take(4) {
            assert!(m.sharp);
            for k in 0..3 {
                let pi = theory
                    .preparation_index(&format!("{}{}", m.label, k))
                    .unwrap();
                for out in 0..3 {
                    let expected = if out == k { 1.0 } else { 0.0 };
                    assert!((theory.prob(mi, pi, out) - expected).abs() < 1e-9);
                }
            }
        }

        // Every mixture fails the projector test on every element.
        for m in theory.measurements().iter().skip(4) {
            assert!(!m.sharp);
            for e in m.povm.effects() {
                assert!(!is_projector(e.op(), 1e-6));
            }
        }

        // The mixed state sees uniform statistics everywhere.
        let mix = theory.preparation_index("mix").unwrap();
        for mi in 0..10 {
            for k in 0..3 {
                assert!((theory.prob(mi, mix, k) - 1.0 / 3.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn adequacy_identity_against_born() {
        // Representation identity: sum_u W(u) xi(u) = tr(rho E) checked
        // against an independently computed Born value.
        let aset = phase_point_operators().unwrap();
        let theory = stabilizer_fragment().unwrap();
        let rho = &theory.preparations()[4].state;
        let e = theory.measurements()[7].povm.effect(1);
        let w = wigner_distribution(&aset, rho).unwrap();
        let xi = wigner_response(&aset, e).unwrap();
        let lhs: f64 = PhasePoint::all()
            .map(|u| w.value(u) * xi.value(u))
            .sum();
        let rhs = born(rho, e).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn full_verification_passes() {
        let v = verify_subtheory_noncontextual_model().unwrap();
        assert!(v.adequacy.holds());
        assert!(v.min_epistemic_weight >= -1e-12);
        assert!(v.min_response >= -1e-12 && v.max_response <= 1.0 + 1e-12);
        assert!(v.measurement_nc.holds());
        assert!(v.preparation_nc.holds());
        assert!(v.determinism.holds());
        assert!(v.certainty.holds());
        assert!(v.magic_state_min_weight < -0.32);
        assert!(v.holds());
    }
}
