use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bchodge::algebra::FormDoc;
use bchodge::cones::Probe;
use bchodge::{fixtures, Complex, Form, HermitianMetric, LieModel};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

/// Marks failures that should exit with status 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())).into())
}

/// Loads a model and returns it with the stem used for golden files.
pub fn model(spec: Option<&str>) -> Result<(LieModel, String)> {
    let Some(spec) = spec else {
        return Err(InputError("--model is required".into()).into());
    };
    let path = PathBuf::from(spec);
    if !path.exists() {
        if let Some(m) = fixtures::by_name(spec) {
            return Ok((m, spec.to_string()));
        }
    }
    let text = read(&path)?;
    let model = LieModel::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok((model, stem))
}

pub fn metric(spec: &str, model: &LieModel, seed: u64) -> Result<HermitianMetric> {
    match spec {
        "identity" => Ok(HermitianMetric::identity(model.n())),
        "random" => Ok(HermitianMetric::random(model.n(), &mut ChaCha8Rng::seed_from_u64(seed))),
        path => {
            let text = read(Path::new(path))?;
            HermitianMetric::from_json(model, &text).with_context(|| format!("parsing {path}"))
        }
    }
}

pub fn class(spec: &str, model: &LieModel, metric: &HermitianMetric) -> Result<Form> {
    let n = model.n();
    Ok(match spec {
        "omega" => metric.omega().clone(),
        "-omega" => metric.omega().scale_real(-1.0),
        "omega_n1" => metric.omega_power(n - 1),
        "-omega_n1" => metric.omega_power(n - 1).scale_real(-1.0),
        path => {
            let text = read(Path::new(path))?;
            FormDoc::from_json(&text)
                .and_then(|doc| doc.to_form(n))
                .with_context(|| format!("parsing {path}"))?
        }
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProbeFile {
    probes: Vec<ProbeDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProbeDoc {
    name: String,
    h: Vec<Vec<[f64; 2]>>,
}

pub fn probes(path: &Path, n: usize) -> Result<Vec<Probe>> {
    let text = read(path)?;
    let doc: ProbeFile = serde_json::from_str(&text)
        .map_err(|e| InputError(format!("parsing {}: {e}", path.display())))?;
    doc.probes
        .into_iter()
        .map(|p| {
            if p.h.len() != n || p.h.iter().any(|row| row.len() != n) {
                bail!(InputError(format!("probe `{}` must be an {n}×{n} matrix", p.name)));
            }
            let h = DMatrix::from_fn(n, n, |i, j| Complex::new(p.h[i][j][0], p.h[i][j][1]));
            let witness = HermitianMetric::new(p.name.clone(), h)?;
            Ok(Probe { name: p.name, witness: Some(witness) })
        })
        .collect()
}
