//! Built-in fixture corpus. The same documents ship under `fixtures/models`
//! and `fixtures/metrics` for use from the command line.

use crate::hodge::HermitianMetric;
use crate::model::LieModel;

const TORUS1: &str = include_str!("../fixtures/models/torus1.json");
const TORUS2: &str = include_str!("../fixtures/models/torus2.json");
const TORUS3: &str = include_str!("../fixtures/models/torus3.json");
const IWASAWA: &str = include_str!("../fixtures/models/iwasawa.json");
const KODAIRA_THURSTON: &str = include_str!("../fixtures/models/kodaira_thurston.json");
const AFFINE: &str = include_str!("../fixtures/models/affine.json");

/// Names accepted by [`by_name`].
pub const NAMES: [&str; 6] = [
    "torus1",
    "torus2",
    "torus3",
    "iwasawa",
    "kodaira_thurston",
    "affine",
];

fn load(doc: &str) -> LieModel {
    LieModel::from_json(doc).expect("built-in fixture parses")
}

/// Abelian model of complex dimension `n ∈ {1, 2, 3}`.
pub fn torus(n: usize) -> LieModel {
    match n {
        1 => load(TORUS1),
        2 => load(TORUS2),
        3 => load(TORUS3),
        _ => panic!("no torus fixture of dimension {n}"),
    }
}

/// `dφ³ = −φ¹∧φ²`.
pub fn iwasawa() -> LieModel {
    load(IWASAWA)
}

/// `dφ² = φ¹∧φ̄¹`.
pub fn kodaira_thurston() -> LieModel {
    load(KODAIRA_THURSTON)
}

/// `dφ² = φ¹∧φ²`: integrable but not unimodular.
pub fn affine() -> LieModel {
    load(AFFINE)
}

pub fn by_name(name: &str) -> Option<LieModel> {
    Some(match name {
        "torus1" => torus(1),
        "torus2" => torus(2),
        "torus3" => torus(3),
        "iwasawa" => iwasawa(),
        "kodaira_thurston" => kodaira_thurston(),
        "affine" => affine(),
        _ => return None,
    })
}

pub fn all() -> Vec<LieModel> {
    NAMES.iter().filter_map(|n| by_name(n)).collect()
}

pub fn unimodular() -> Vec<LieModel> {
    all().into_iter().filter(|m| m.is_unimodular()).collect()
}

/// `ω = (i/2)(φ¹∧φ̄¹ + φ²∧φ̄²)` on the Kodaira–Thurston model.
pub fn kt_standard_metric() -> HermitianMetric {
    let m = kodaira_thurston();
    HermitianMetric::from_json(&m, include_str!("../fixtures/metrics/kt_standard.json"))
        .expect("built-in metric parses")
}
