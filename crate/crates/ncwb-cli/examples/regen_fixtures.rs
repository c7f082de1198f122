//! Regenerate the JSON fixtures shipped with the CLI from their canonical
//! in-code constructions:
//!
//!   cargo run -p ncwb-cli --example regen_fixtures

use std::path::Path;

use ncwb_core::assign::{problems, AssignmentMode};
use ncwb_core::measurement::{build_quantum_theory, Povm};
use ncwb_core::ontology::OntologicalModel;
use ncwb_core::operator::{DensityOperator, Effect, HermitianOperator};
use ncwb_core::wigner::{phase_point_operators, stabilizer_fragment, wigner_model};

fn write(dir: &Path, name: &str, value: &impl serde::Serialize) {
    let mut text = serde_json::to_string_pretty(value).expect("serializable fixture");
    text.push('\n');
    let path = dir.join(name);
    std::fs::write(&path, text).expect("fixture written");
    println!("wrote {}", path.display());
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    std::fs::create_dir_all(&dir).expect("fixtures directory");

    write(&dir, "fair-coin.json", &problems::fair_coin());
    write(&dir, "cabello-nakamura.json", &problems::cabello_nakamura());
    write(
        &dir,
        "same-effect-twice.json",
        &problems::same_effect_twice(1.0 / 3.0).unwrap(),
    );
    write(
        &dir,
        "coarse-grain-paradox.json",
        &problems::coarse_grain_paradox(1.0 / 3.0, 1.0 / 4.0).unwrap(),
    );
    write(&dir, "trine.json", &problems::trine());
    write(
        &dir,
        "xyz-projectors.json",
        &problems::xyz_projectors().with_mode(AssignmentMode::Deterministic),
    );

    // Passing theory/model pair: the fair coin with its uniform response.
    let half = Effect::new(HermitianOperator::identity(2).scale(0.5)).unwrap();
    let coin = Povm::new(vec![half.clone(), half.clone()]).unwrap();
    let coin_theory = build_quantum_theory(
        &[DensityOperator::maximally_mixed(2)],
        std::slice::from_ref(&coin),
    )
    .unwrap();
    write(&dir, "fair-coin-theory.json", &coin_theory);
    let mut coin_model = OntologicalModel::new(vec!["l0".into()]);
    coin_model.insert_epistemic("P0", vec![1.0]).unwrap();
    coin_model
        .insert_responses("M0", vec![vec![0.5], vec![0.5]])
        .unwrap();
    write(&dir, "fair-coin-model.json", &coin_model);

    // Failing pair: two coin procedures, one model with swapped indicator
    // responses. Adequate, but not measurement-noncontextual.
    let two_coins =
        build_quantum_theory(&[DensityOperator::maximally_mixed(2)], &[coin.clone(), coin])
            .unwrap();
    write(&dir, "two-coins-theory.json", &two_coins);
    let mut flipped = OntologicalModel::new(vec!["l0".into(), "l1".into()]);
    flipped.insert_epistemic("P0", vec![0.5, 0.5]).unwrap();
    flipped
        .insert_responses("M0", vec![vec![1.0, 0.0], vec![0.0, 1.0]])
        .unwrap();
    flipped
        .insert_responses("M1", vec![vec![0.0, 1.0], vec![1.0, 0.0]])
        .unwrap();
    write(&dir, "flipped-indicators-model.json", &flipped);

    // The qutrit stabilizer fragment with its phase-space model.
    let fragment = stabilizer_fragment().unwrap();
    write(&dir, "stabilizer-fragment-theory.json", &fragment);
    let aset = phase_point_operators().unwrap();
    let model = wigner_model(&aset, &fragment).unwrap();
    write(&dir, "wigner-model.json", &model);
}
