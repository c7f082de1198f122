//! Acceptance suite: one test per criterion, each printing a PASS line once
//! its assertions hold. Oracles used here (Bloch algebra, brute-force
//! enumeration, direct Born traces) are coded independently of the library
//! paths they check.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ncwb_core::assign::{
    enumerate_deterministic_assignments, enumerate_spectral_assignments, gleason_feasibility,
    problems, response_from_projector_valuation, Assignment, AssignmentMode, AssignmentProblem,
    GleasonCertificate, Relation,
};
use ncwb_core::measurement::{
    fair_coin_naimark_pair, reduce, spectral_realization, Povm,
};
use ncwb_core::ontology::{bit_flip_extension_demo, ontic_extend, OntologicalModel};
use ncwb_core::operator::{
    basis_vector, born, is_projector, spectral_decompose, ComplexMatrix, DensityOperator, Effect,
    HermitianOperator,
};
use ncwb_core::wigner::verify_subtheory_noncontextual_model;

#[test]
fn criterion_01_fair_coin_triviality() {
    let problem = problems::fair_coin();
    let det = enumerate_deterministic_assignments(&problem).unwrap();
    assert!(det.is_empty(), "0/1 assignment search must come back empty");

    let spectral =
        enumerate_spectral_assignments(&problem.with_mode(AssignmentMode::Spectral)).unwrap();
    assert_eq!(spectral.len(), 1, "exactly one spectral assignment");
    assert!(
        (spectral[0].values[0] - 0.5).abs() <= 1e-9,
        "the unique value is 1/2"
    );
    println!("criterion 01 (fair-coin triviality): PASS");
}

#[test]
fn criterion_02_effect_parity_infeasibility() {
    let problem = problems::cabello_nakamura();
    assert_eq!(problem.len(), 6);
    assert_eq!(1u32 << problem.len(), 64, "exhaustive space is 64 candidates");
    let det = enumerate_deterministic_assignments(&problem).unwrap();
    assert!(det.is_empty());
    println!("criterion 02 (three-POVM parity infeasibility): PASS");
}

#[test]
fn criterion_03_coarse_graining_paradox() {
    let problem = problems::coarse_grain_paradox(1.0 / 3.0, 1.0 / 4.0).unwrap();
    let det = enumerate_deterministic_assignments(&problem).unwrap();
    assert!(det.is_empty(), "deterministic mode is infeasible");

    let spectral =
        enumerate_spectral_assignments(&problem.clone().with_mode(AssignmentMode::Spectral))
            .unwrap();
    assert_eq!(spectral.len(), 1);
    for (e, &w) in problem.effects().iter().zip(&spectral[0].values) {
        let s = e.op().get(0, 0).re; // every effect is s*I
        assert!((w - s).abs() <= 1e-9, "w(sI) = s");
    }
    println!("criterion 03 (coarse-graining paradox): PASS");
}

#[test]
fn criterion_04_trine_infeasibility() {
    let problem = problems::trine();
    // The registered relation really is a resolution of the identity.
    let mut sum = HermitianOperator::zeros(2);
    for e in problem.effects() {
        sum = sum.add(e.op());
    }
    assert!(
        sum.sub(&HermitianOperator::identity(2)).matrix().max_abs() <= 1e-9,
        "(2/3)(P1+P2+P3) = I"
    );
    // Spectra are {0, 2/3} after merging.
    for e in problem.effects() {
        let mut evs = spectral_decompose(e.op(), 1e-7).unwrap().eigenvalues;
        evs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(evs.len(), 2);
        assert!(evs[0].abs() <= 1e-9 && (evs[1] - 2.0 / 3.0).abs() <= 1e-9);
    }
    let out = enumerate_spectral_assignments(&problem).unwrap();
    assert!(out.is_empty());
    println!("criterion 04 (trine spectral infeasibility): PASS");
}

#[test]
fn criterion_05_density_operator_feasibility() {
    let problem = problems::xyz_projectors();

    // Round trip: probabilities induced by a known state recover that state.
    let mut rng = ChaCha8Rng::seed_from_u64(501);
    for _ in 0..5 {
        let rho0 = random_density(&mut rng, 2);
        let w = Assignment {
            values: problem
                .effects()
                .iter()
                .map(|e| born(&rho0, e).unwrap())
                .collect(),
        };
        match gleason_feasibility(problem.effects(), &w, 1e-9).unwrap() {
            GleasonCertificate::Feasible { rho, .. } => {
                assert!(rho.op().approx_eq(rho0.op(), 1e-8), "state recovered");
            }
            other => panic!("round trip must be feasible, got {other:?}"),
        }
    }

    // All eight rule-consistent 0/1 assignments are infeasible, each with a
    // positivity witness matching the Bloch-algebra oracle: the assignment
    // forces n = (2v_x - 1, 2v_y - 1, 2v_z - 1) with every component +-1,
    // so |n| = sqrt(3) and the solved operator's smallest eigenvalue is
    // (1 - sqrt(3))/2.
    let det = enumerate_deterministic_assignments(&problem).unwrap();
    assert_eq!(det.len(), 8);
    for a in &det {
        let mut bloch_norm_sq = 0.0;
        for axis in 0..3 {
            let v_plus = a.values[2 * axis];
            let n = 2.0 * v_plus - 1.0;
            assert!((n.abs() - 1.0).abs() <= 1e-12);
            bloch_norm_sq += n * n;
        }
        let predicted_min = (1.0 - bloch_norm_sq.sqrt()) / 2.0;
        assert!((bloch_norm_sq - 3.0).abs() <= 1e-12, "Bloch norm sqrt(3)");
        match gleason_feasibility(problem.effects(), a, 1e-9).unwrap() {
            GleasonCertificate::NotPositive { min_eigenvalue, .. } => {
                assert!(
                    (min_eigenvalue - predicted_min).abs() <= 1e-9,
                    "solver witness {min_eigenvalue} vs oracle {predicted_min}"
                );
            }
            other => panic!("expected positivity violation, got {other:?}"),
        }
    }
    println!("criterion 05 (density-operator feasibility): PASS");
}

#[test]
fn criterion_06_naimark_pair() {
    let (ext1, ext2) = fair_coin_naimark_pair();
    let half = Effect::new(HermitianOperator::identity(2).scale(0.5)).unwrap();
    let coin = Povm::new(vec![half.clone(), half]).unwrap();

    let red1 = reduce(&ext1.joint_pvm, &ext1.ancilla_state, false).unwrap();
    assert!(red1.approx_eq(&coin, 1e-9), "first extension reduces to the coin");
    let red2 = reduce(&ext2.joint_pvm, &ext2.ancilla_state, true).unwrap();
    assert!(red2.approx_eq(&coin, 1e-9), "second extension reduces to the coin");

    let anc = HermitianOperator::projector_onto(&basis_vector(3, 2));
    let joint_state =
        DensityOperator::new(HermitianOperator::identity(2).scale(0.5).kron(&anc)).unwrap();
    let stats1 = ext1.joint_statistics(&joint_state).unwrap();
    assert!((stats1[0] - 0.5).abs() <= 1e-9 && (stats1[1] - 0.5).abs() <= 1e-9);
    let stats2 = ext2.joint_statistics(&joint_state).unwrap();
    assert!(stats2[0].abs() <= 1e-9 && stats2[1].abs() <= 1e-9);
    assert!((stats2[2] - 1.0).abs() <= 1e-9);
    println!("criterion 06 (distinct joint extensions of one POVM): PASS");
}

#[test]
fn criterion_07_deterministic_extension() {
    let mut rng = ChaCha8Rng::seed_from_u64(701);
    for instance in 0..100 {
        let n_lambda = rng.gen_range(1..=10);
        let n_out = rng.gen_range(2..=5);
        let labels: Vec<String> = (0..n_lambda).map(|l| format!("l{l}")).collect();
        let mut model = OntologicalModel::new(labels);

        let raw: Vec<f64> = (0..n_lambda).map(|_| rng.gen_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        model
            .insert_epistemic("P0", raw.iter().map(|v| v / total).collect())
            .unwrap();

        let mut rows = vec![vec![0.0; n_lambda]; n_out];
        for l in 0..n_lambda {
            let col: Vec<f64> = (0..n_out).map(|_| rng.gen_range(0.0..1.0)).collect();
            let t: f64 = col.iter().sum();
            let mut norm: Vec<f64> = col.iter().map(|v| v / t).collect();
            let tail: f64 = norm[1..].iter().sum();
            norm[0] = 1.0 - tail;
            for (k, row) in rows.iter_mut().enumerate() {
                row[l] = norm[k];
            }
        }
        model.insert_responses("M", rows.clone()).unwrap();

        let ext = ontic_extend(&model, "M").unwrap();
        let mu: Vec<f64> = model.epistemic("P0").unwrap().to_vec();
        for l in 0..n_lambda {
            for k in 0..n_out {
                // Interval lengths equal the base responses exactly.
                assert_eq!(
                    ext.marginal(k, l).to_bits(),
                    rows[k][l].to_bits(),
                    "instance {instance}"
                );
                // Pointwise 0/1 on a grid plus random ancilla draws.
                for step in 0..=10 {
                    let la = step as f64 / 10.0;
                    let v = ext.response(k, l, la);
                    assert!(v == 0.0 || v == 1.0);
                }
                let v = ext.response(k, l, rng.gen_range(0.0..1.0));
                assert!(v == 0.0 || v == 1.0);
            }
        }
        for k in 0..n_out {
            let base = model.prediction("P0", "M", k).unwrap();
            let extended = ext.prediction(&mu, k);
            assert_eq!(base.to_bits(), extended.to_bits(), "instance {instance}");
            // Residues against any reference probability agree bit for bit.
            let reference: f64 = rng.gen_range(0.0..1.0);
            assert_eq!(
                (base - reference).abs().to_bits(),
                (extended - reference).abs().to_bits()
            );
        }
    }
    println!("criterion 07 (outcome-deterministic extension, 100 random instances): PASS");
}

#[test]
fn criterion_08_bit_flip_extension() {
    let demo = bit_flip_extension_demo().unwrap();
    assert!(demo.system_responses_equal, "system response sets coincide");
    for &m in &demo.disagreement_measure {
        assert!(
            (m - 1.0).abs() <= 1e-12,
            "extended responses differ on a full-measure region, got {m}"
        );
    }
    assert!(demo.base_adequate && demo.extensions_adequate && demo.extensions_deterministic);
    println!("criterion 08 (bit-flip extension inequivalence): PASS");
}

#[test]
fn criterion_09_qutrit_fragment_witness() {
    let v = verify_subtheory_noncontextual_model().unwrap();
    assert_eq!(v.preparations, 13);
    assert_eq!(v.measurements, 10);
    assert_eq!(v.adequacy.checked, 13 * 10 * 3, "all table entries checked");
    assert!(v.adequacy.holds() && v.adequacy.max_residual <= 1e-9);
    assert!(v.min_epistemic_weight >= -1e-9, "nonnegative mu");
    assert!(
        v.min_response >= -1e-9 && v.max_response <= 1.0 + 1e-9,
        "responses in [0, 1]"
    );
    assert!(v.measurement_nc.holds() && v.preparation_nc.holds());
    assert!(v.certainty.holds(), "certified-outcome structure holds");
    assert!(v.determinism.holds(), "deterministic iff sharp across 4 + 6");
    assert!(
        v.magic_state_min_weight < -1e-3,
        "one non-stabilizer preparation goes negative: {}",
        v.magic_state_min_weight
    );
    println!("criterion 09 (qutrit stabilizer fragment witness): PASS");
}

#[test]
fn criterion_10_sharpness_machinery() {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let mut seen_projector = 0;
    let mut seen_generic = 0;
    for _ in 0..50 {
        let d = rng.gen_range(2..=4);
        let make_projector = rng.gen_bool(0.3);
        let effect = if make_projector {
            seen_projector += 1;
            random_projector_effect(&mut rng, d)
        } else {
            seen_generic += 1;
            random_generic_effect(&mut rng, d)
        };
        let projector = is_projector(effect.op(), 1e-9);
        assert_eq!(projector, make_projector);

        let resolution = spectral_decompose(effect.op(), 1e-7).unwrap();
        let spectrum = resolution.eigenvalues.clone();
        for chosen in 0..spectrum.len() {
            let selection: Vec<bool> = (0..spectrum.len()).map(|i| i == chosen).collect();
            let w = response_from_projector_valuation(&effect, &selection).unwrap();
            assert!(
                spectrum.iter().any(|s| (s - w).abs() <= 1e-12),
                "assigned value sits in the merged spectrum"
            );
            let extremal = w.abs() <= 1e-9 || (w - 1.0).abs() <= 1e-9;
            assert_eq!(
                extremal, projector,
                "0/1 value exactly for projectors (w = {w})"
            );
        }

        let realization = spectral_realization(&effect).unwrap();
        let realized = realization.realized().unwrap();
        let residue = realized
            .effect(realization.distinguished)
            .op()
            .sub(effect.op())
            .matrix()
            .max_abs();
        assert!(residue <= 1e-9, "post-processing round trip");
        assert_eq!(
            realization.probabilistic, !projector,
            "irreducibly probabilistic exactly for nonprojective effects"
        );
    }
    assert!(seen_projector >= 5 && seen_generic >= 5, "both classes sampled");
    println!("criterion 10 (assignment and realization machinery, 50 random effects): PASS");
}

#[test]
fn criterion_11_oracle_equivalence() {
    // Shipped problems.
    let shipped: Vec<AssignmentProblem> = vec![
        problems::fair_coin(),
        problems::cabello_nakamura(),
        problems::coarse_grain_paradox(1.0 / 3.0, 1.0 / 4.0).unwrap(),
        problems::same_effect_twice(1.0 / 3.0).unwrap(),
        problems::xyz_projectors(),
        problems::trine().with_mode(AssignmentMode::Deterministic),
    ];
    for (i, problem) in shipped.iter().enumerate() {
        compare_with_oracle(problem, &format!("shipped[{i}]"));
    }

    // 100 random small problems over diagonal POVMs.
    let mut rng = ChaCha8Rng::seed_from_u64(1101);
    let mut built = 0;
    while built < 100 {
        let dim = rng.gen_range(2..=3);
        let n_povms = rng.gen_range(1..=3);
        let mut povms = Vec::new();
        for _ in 0..n_povms {
            let outcomes = rng.gen_range(2..=4);
            // Random diagonal POVM: each diagonal slot distributes over the
            // outcomes.
            let mut diags = vec![vec![0.0f64; dim]; outcomes];
            for slot in 0..dim {
                let raw: Vec<f64> = (0..outcomes).map(|_| rng.gen_range(0.05..1.0)).collect();
                let t: f64 = raw.iter().sum();
                let mut norm: Vec<f64> = raw.iter().map(|v| v / t).collect();
                let tail: f64 = norm[1..].iter().sum();
                norm[0] = 1.0 - tail;
                for k in 0..outcomes {
                    diags[k][slot] = norm[k];
                }
            }
            let effects = diags
                .iter()
                .map(|d| Effect::new(HermitianOperator::diag(d)).unwrap())
                .collect::<Vec<_>>();
            povms.push(Povm::new(effects).unwrap());
        }
        let problem = AssignmentProblem::from_povms(&povms, AssignmentMode::Deterministic).unwrap();
        if problem.len() > 12 {
            continue;
        }
        compare_with_oracle(&problem, &format!("random[{built}]"));
        built += 1;
    }
    println!("criterion 11 (oracle equivalence, shipped + 100 random problems): PASS");
}

/// Independent brute-force enumeration: walk all bitmasks with integer
/// arithmetic and keep those giving each relation total weight one. Shares
/// no code with the library enumerator.
fn brute_force_reference(n: usize, relations: &[Vec<usize>]) -> Vec<Vec<u8>> {
    let mut found = Vec::new();
    for mask in 0usize..(1usize << n) {
        let bits: Vec<u8> = (0..n).map(|i| ((mask >> (n - 1 - i)) & 1) as u8).collect();
        let ok = relations.iter().all(|idxs| {
            let total: u32 = idxs.iter().map(|&i| bits[i] as u32).sum();
            total == 1
        });
        if ok {
            found.push(bits);
        }
    }
    found
}

fn compare_with_oracle(problem: &AssignmentProblem, tag: &str) {
    let relations: Vec<Vec<usize>> = problem
        .relations()
        .iter()
        .map(|rel| match rel {
            Relation::Povm { indices } => indices.clone(),
            other => panic!("oracle comparison expects POVM relations, got {other:?}"),
        })
        .collect();
    let reference = brute_force_reference(problem.len(), &relations);
    let ours = enumerate_deterministic_assignments(problem).unwrap();
    assert_eq!(ours.len(), reference.len(), "{tag}: assignment count");
    let ours_as_bits: Vec<Vec<u8>> = ours
        .iter()
        .map(|a| a.values.iter().map(|&v| v as u8).collect())
        .collect();
    for bits in &reference {
        assert!(ours_as_bits.contains(bits), "{tag}: missing {bits:?}");
    }
}

// --- self-contained random generators (independent of library test helpers) ---

fn random_unitary_columns(rng: &mut ChaCha8Rng, d: usize) -> Vec<Vec<Complex64>> {
    let mut cols: Vec<Vec<Complex64>> = Vec::new();
    while cols.len() < d {
        let mut v: Vec<Complex64> = (0..d)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        for c in &cols {
            let overlap: Complex64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, ci) in v.iter_mut().zip(c) {
                *vi -= overlap * ci;
            }
        }
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            for z in v.iter_mut() {
                *z /= Complex64::new(norm, 0.0);
            }
            cols.push(v);
        }
    }
    cols
}

fn effect_from_eigensystem(cols: &[Vec<Complex64>], eigs: &[f64]) -> Effect {
    let d = cols.len();
    let mut m = ComplexMatrix::zeros(d);
    for (col, &s) in cols.iter().zip(eigs) {
        let outer = ComplexMatrix::outer(col).scale_re(s);
        m = m.add(&outer);
    }
    Effect::new(HermitianOperator::new(m).unwrap()).unwrap()
}

/// Random effect whose eigenvalues sit strictly inside (0, 1) and pairwise
/// apart, so the merged spectrum is never extremal.
fn random_generic_effect(rng: &mut ChaCha8Rng, d: usize) -> Effect {
    let cols = random_unitary_columns(rng, d);
    let mut eigs: Vec<f64>;
    loop {
        eigs = (0..d).map(|_| rng.gen_range(0.05..0.95)).collect();
        let mut sorted = eigs.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if sorted.windows(2).all(|w| w[1] - w[0] > 1e-3) {
            break;
        }
    }
    effect_from_eigensystem(&cols, &eigs)
}

/// Random rank-r projector, 1 <= r < d.
fn random_projector_effect(rng: &mut ChaCha8Rng, d: usize) -> Effect {
    let cols = random_unitary_columns(rng, d);
    let r = rng.gen_range(1..d);
    let eigs: Vec<f64> = (0..d).map(|i| if i < r { 1.0 } else { 0.0 }).collect();
    effect_from_eigensystem(&cols, &eigs)
}

fn random_density(rng: &mut ChaCha8Rng, d: usize) -> DensityOperator {
    let cols = random_unitary_columns(rng, d);
    let raw: Vec<f64> = (0..d).map(|_| rng.gen_range(0.05..1.0)).collect();
    let t: f64 = raw.iter().sum();
    let eigs: Vec<f64> = raw.iter().map(|v| v / t).collect();
    let d_eff = effect_from_eigensystem(&cols, &eigs);
    DensityOperator::new(d_eff.into_op()).unwrap()
}
