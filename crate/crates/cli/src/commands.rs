use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use bchodge::algebra::basis;
use bchodge::classify::{aeppli_harmonic_check, classify_metric};
use bchodge::cohomology::{cohomology_table, lambda_sign_partition, Lefschetz, TableEntry, Theory};
use bchodge::cones::{copsef_pairing_test, skt_cone_feasibility};
use bchodge::{Bidegree, Complex, Error, Form, FormSpace, HermitianMetric, Hodge, LieModel, Tolerances};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::{inputs, render, Common, Format};

/// Marks failures that should exit with status 1.
#[derive(Debug)]
struct ValidationFailure(String);

impl std::fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ValidationFailure {}

pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<inputs::InputError>() || cause.is::<serde_json::Error>() {
            return 2;
        }
        if cause.is::<ValidationFailure>() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Parse { .. } => 2,
                Error::CrossCheck(_) => 3,
                _ => 1,
            };
        }
    }
    1
}

pub struct Output {
    command: &'static str,
    stem: String,
    report: Value,
    table: String,
    code: u8,
}

impl Output {
    pub fn emit(self, common: &Common) -> Result<u8> {
        let json = serde_json::to_string_pretty(&self.report)? + "\n";
        if common.bless {
            let dir = common.golden_dir.clone().unwrap_or_else(default_golden_dir);
            std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(format!("{}.{}.json", self.stem, self.command));
            std::fs::write(&path, &json).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("blessed {}", path.display());
        }
        match common.format {
            Format::Json => print!("{json}"),
            Format::Table => print!("{}", self.table),
        }
        Ok(self.code)
    }
}

fn default_golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/golden")
}

struct Session {
    model: LieModel,
    stem: String,
    metric: HermitianMetric,
    tol: Tolerances,
}

impl Session {
    fn load(common: &Common) -> Result<Self> {
        let (model, stem) = inputs::model(common.model.as_deref())?;
        let report = model.validate();
        if !report.is_valid() {
            return Err(ValidationFailure(format!(
                "model `{}` is not a valid structure (d² = 0: {}, integrable: {})",
                model.name(),
                report.d_squared_zero,
                report.integrable
            ))
            .into());
        }
        let metric = inputs::metric(&common.metric, &model, common.seed)?;
        let tol = Tolerances { rank: common.tol_rank, eq: common.tol_eq };
        Ok(Session { model, stem, metric, tol })
    }

    fn hodge(&self) -> Result<Hodge<'_>> {
        Ok(Hodge::new(&self.model, &self.metric)?.with_tolerances(self.tol))
    }

    fn output(&self, command: &'static str, result: impl Serialize, table: String, code: u8) -> Result<Output> {
        let report = json!({
            "command": command,
            "model": self.model.name(),
            "n": self.model.n(),
            "metric": self.metric.name(),
            "tolerances": self.tol,
            "result": result,
        });
        let table = if table.is_empty() { render::flatten(&report) } else { table };
        Ok(Output { command, stem: self.stem.clone(), report, table, code })
    }
}

pub fn validate(common: &Common) -> Result<Output> {
    let (model, stem) = inputs::model(common.model.as_deref())?;
    let report = model.validate();
    let code = if report.is_valid() { 0 } else { 1 };
    let value = json!({
        "command": "validate",
        "model": model.name(),
        "n": model.n(),
        "result": report,
    });
    if code != 0 {
        eprintln!("error: model `{}` failed validation", model.name());
    }
    Ok(Output { command: "validate", stem, table: render::flatten(&value), report: value, code })
}

#[derive(Serialize)]
struct CohomologyReport {
    grids: Vec<Grid>,
    betti: Vec<usize>,
    entries: Vec<TableEntry>,
    all_agree: bool,
}

#[derive(Serialize)]
pub struct Grid {
    pub theory: Theory,
    /// `dims[p][q]`
    pub dims: Vec<Vec<usize>>,
}

pub fn cohomology(common: &Common) -> Result<Output> {
    let ctx = Session::load(common)?;
    let hodge = ctx.hodge()?;
    let n = ctx.model.n();
    let entries = cohomology_table(&hodge);
    let grids = Theory::BIGRADED
        .iter()
        .map(|&theory| {
            let mut dims = vec![vec![0; n + 1]; n + 1];
            for e in entries.iter().filter(|e| e.theory == theory) {
                dims[e.p.unwrap()][e.q.unwrap()] = e.quotient_dim;
            }
            Grid { theory, dims }
        })
        .collect();
    let betti = entries.iter().filter(|e| e.theory == Theory::DeRham).map(|e| e.quotient_dim).collect();
    let all_agree = entries.iter().all(|e| e.agree);
    let report = CohomologyReport { grids, betti, entries, all_agree };
    if !all_agree {
        eprintln!("error: quotient and harmonic dimensions disagree");
    }
    let table = render::cohomology(&report.grids, &report.betti, &report.entries);
    ctx.output("cohomology", report, table, if all_agree { 0 } else { 3 })
}

pub fn classify(common: &Common, strict: bool) -> Result<Output> {
    let ctx = Session::load(common)?;
    let hodge = ctx.hodge()?;
    let c = classify_metric(&hodge, strict);
    let inconsistent = c.inconsistencies(ctx.model.n());
    let code = if inconsistent.is_empty() { 0 } else { 3 };
    if code != 0 {
        eprintln!("error: classification violates implications: {}", inconsistent.join("; "));
    }
    ctx.output("classify", json!({ "classification": c, "inconsistencies": inconsistent }), String::new(), code)
}

pub fn decompose(common: &Common, class: &str) -> Result<Output> {
    let ctx = Session::load(common)?;
    let hodge = ctx.hodge()?;
    let form = inputs::class(class, &ctx.model, &ctx.metric)?;
    let lefschetz = Lefschetz::new(&hodge)?;
    let class = lefschetz.space().class_of(&hodge, &form)?;
    let decomposition = lefschetz.decompose(&class)?;
    let side = lambda_sign_partition(&hodge, &lefschetz, &class).ok().map(|(side, _)| side);
    let result = json!({
        "lambda": [decomposition.lambda_formula.re, decomposition.lambda_formula.im],
        "side": side,
        "hyperplane_dim": lefschetz.space().dim().saturating_sub(1),
        "decomposition": decomposition,
        "orthogonality_residuals": lefschetz.orthogonality_residuals(),
    });
    ctx.output("decompose", result, String::new(), 0)
}

pub fn cone_skt(common: &Common, class: &str) -> Result<Output> {
    let ctx = Session::load(common)?;
    let hodge = ctx.hodge()?;
    let form = inputs::class(class, &ctx.model, &ctx.metric)?;
    let result = skt_cone_feasibility(&hodge, &form, common.seed)?;
    ctx.output("cone-skt", result, String::new(), 0)
}

pub fn cone_copsef(common: &Common, class: &str, probes: &Path) -> Result<Output> {
    let ctx = Session::load(common)?;
    let hodge = ctx.hodge()?;
    let form = inputs::class(class, &ctx.model, &ctx.metric)?;
    let probes = inputs::probes(probes, ctx.model.n())?;
    let result = copsef_pairing_test(&hodge, &form, &probes)?;
    ctx.output("cone-copsef", result, String::new(), 0)
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    status: &'static str,
    value: Option<f64>,
    detail: String,
}

impl Check {
    fn measured(name: &'static str, value: f64, tol: f64, detail: String) -> Self {
        let status = if value < tol { "pass" } else { "fail" };
        Check { name, status, value: Some(value), detail }
    }

    fn skipped(name: &'static str, detail: impl Into<String>) -> Self {
        Check { name, status: "skipped", value: None, detail: detail.into() }
    }
}

pub fn check_lemmas(common: &Common) -> Result<Output> {
    let ctx = Session::load(common)?;
    let hodge = ctx.hodge()?;
    let n = ctx.model.n();
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let mut checks = Vec::new();

    let mut aeppli = Vec::new();
    for p in 0..n {
        let b = Bidegree::new(p, n - 1 - p);
        for mi in basis(n, b) {
            let phi = Form::monomial(n, mi, Complex::new(1.0, 0.0));
            if let Ok(r) = aeppli_harmonic_check(&hodge, &phi) {
                aeppli.push(r.max());
            }
        }
    }
    checks.push(match aeppli.iter().copied().reduce(f64::max) {
        Some(worst) => Check::measured(
            "aeppli_harmonic",
            worst,
            1e-8,
            format!("{} basis (n−1)-forms meet the hypotheses", aeppli.len()),
        ),
        None => Check::skipped("aeppli_harmonic", "no basis (n−1)-form meets the hypotheses"),
    });

    let mut worst = 0.0f64;
    let mut count = 0;
    for p in 0..=n {
        for q in 0..=n - p {
            let b = Bidegree::new(p, q);
            for _ in 0..5 {
                let v: Vec<Complex> =
                    (0..b.dim(n)).map(|_| Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
                let v = ctx.metric.primitive_part(&Form::from_vector(n, b, &v));
                worst = worst.max(hodge.primitive_star_check(&v)?);
                count += 1;
            }
        }
    }
    checks.push(Check::measured("primitive_star", worst, 1e-9, format!("{count} random primitive forms")));

    if ctx.model.is_unimodular() {
        let mut worst = 0.0f64;
        for p in 0..=n {
            for q in 0..=n {
                let b = Bidegree::new(p, q);
                let star = ctx.metric.star(&FormSpace::single(n, b));
                let target = Bidegree::new(n - q, n - p);
                let lhs = hodge.laplacian_bc(b).then(&star);
                let rhs = star.then(&hodge.laplacian_a(target));
                let scale = lhs.norm().max(1.0);
                worst = worst.max((lhs.matrix - rhs.matrix).norm() / scale);
            }
        }
        checks.push(Check::measured("star_intertwining", worst, 1e-9, "max ‖⋆Δ_BC − Δ_A⋆‖ over bidegrees".into()));
    } else {
        checks.push(Check::skipped("star_intertwining", "model is not unimodular"));
    }

    let mut failing = Vec::new();
    let mut worst = 0.0f64;
    for p in 0..=n {
        for q in 0..=n {
            let b = Bidegree::new(p, q);
            for r in [hodge.decomposition_bc(b), hodge.decomposition_a(b)] {
                worst = worst.max(r.orthogonality_residual).max(r.image_residual).max(r.closed_containment_residual);
                if !r.holds(1e-9) {
                    failing.push(format!("{} {}", r.theory, b));
                }
            }
        }
    }
    let detail = if failing.is_empty() { "all bidegrees".to_string() } else { format!("failing: {}", failing.join(", ")) };
    let mut decomposition = Check::measured("decompositions", worst, 1e-9, detail);
    if !failing.is_empty() {
        decomposition.status = "fail";
    }
    checks.push(decomposition);

    let failed = checks.iter().any(|c| c.status == "fail");
    if failed {
        eprintln!("error: at least one lemma check failed");
    }
    let table = render::checks(checks.iter().map(|c| (c.name, c.status, c.value, c.detail.as_str())));
    ctx.output("check-lemmas", json!({ "checks": checks }), table, if failed { 3 } else { 0 })
}
