//! SKT-cone membership of real Aeppli `(1,1)`-classes by a search for a
//! positive-definite representative, and sampled co-pseudo-effective tests of
//! Bott-Chern `(n−1,n−1)`-classes against SKT probes.
//!
//! Every representative of an Aeppli class is `∂∂̄`-closed, so the search runs
//! over `α₀ + ∂̄u + ∂ū`, `u ∈ Λ^{1,0}`, and maximizes the smallest eigenvalue of
//! the Hermitian coefficient matrix by projected supergradient ascent.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::algebra::{Bidegree, Complex, Form, FormDoc, ONE};
use crate::cohomology::{cohomology, Theory};
use crate::error::{Error, Result};
use crate::hodge::{hermitian_coefficients, HermitianMetric, Hodge};
use crate::linalg::hermitian_eigen;

/// Positive-definiteness threshold, relative to `‖H(α₀)‖_F`.
pub const TAU_PD: f64 = 1e-7;
pub const MAX_ITERATIONS: usize = 10_000;
pub const RESTARTS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    FeasibleWithWitness,
    InfeasibleCertified,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConeWitness {
    pub representative: FormDoc,
    pub h: Vec<Vec<[f64; 2]>>,
    pub min_eigenvalue: f64,
    /// Distance between the harmonic projections of the witness and the queried class.
    pub class_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    /// Name of the stored co-pseudo-effective class.
    pub name: String,
    pub pairing: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConeMembershipResult {
    pub verdict: Verdict,
    pub best_min_eigenvalue: f64,
    /// `best_min_eigenvalue / ‖H(α₀)‖_F`.
    pub normalized_min_eigenvalue: f64,
    pub iterations: usize,
    pub restarts: usize,
    pub witness: Option<ConeWitness>,
    pub certificate: Option<Certificate>,
    #[serde(skip)]
    pub witness_form: Option<Form>,
}

fn matrix_doc(h: &DMatrix<Complex>) -> Vec<Vec<[f64; 2]>> {
    (0..h.nrows())
        .map(|r| (0..h.ncols()).map(|c| [h[(r, c)].re, h[(r, c)].im]).collect())
        .collect()
}

fn check_real_class(hodge: &Hodge, class: &Form, b: Bidegree) -> Result<()> {
    if class.bidegree() != b {
        return Err(Error::Dimension(format!("expected a {b} class, got bidegree {}", class.bidegree())));
    }
    let norm = class.coeff_norm();
    let tol = hodge.tol.eq.max(1e-9);
    if norm > 0.0 && class.reality_residual() > tol * norm {
        return Err(Error::Precondition(format!(
            "class is not real (conjugation residual {:.3e})",
            class.reality_residual() / norm
        )));
    }
    Ok(())
}

/// Co-pseudo-effective classes stored for separation: `⋆_I(iφ^k∧φ̄^k)` for each
/// `k` and `ω_{n−1}` of the identity metric, kept only when `d`-closed.
pub fn stored_copsef_classes(hodge: &Hodge) -> Vec<(String, Form)> {
    let n = hodge.n();
    let model = hodge.model;
    let id = HermitianMetric::identity(n);
    let mut out = Vec::new();
    for k in 1..=n {
        let f = Form::term(n, &[k], &[k], crate::algebra::I).expect("valid index");
        out.push((format!("star_identity(i phi{k} phibar{k})"), id.star_form(&f)));
    }
    out.push(("omega_n1(identity)".to_string(), id.omega_power(n - 1)));
    out.retain(|(_, f)| {
        model.del(f).coeff_norm() < 1e-12 * f.coeff_norm().max(1.0)
            && model.delbar(f).coeff_norm() < 1e-12 * f.coeff_norm().max(1.0)
    });
    out
}

/// Concave objective `x ↦ λ_min(H₀ + Σ x_j B_j)` over real parameters.
struct Objective {
    h0: DMatrix<Complex>,
    directions: Vec<DMatrix<Complex>>,
}

impl Objective {
    fn matrix(&self, x: &[f64]) -> DMatrix<Complex> {
        let mut h = self.h0.clone();
        for (b, &t) in self.directions.iter().zip(x) {
            h += b * Complex::new(t, 0.0);
        }
        h
    }

    /// Value and a supergradient `g_j = v* B_j v`.
    fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let (vals, vecs) = hermitian_eigen(&self.matrix(x));
        let v = vecs.column(0);
        let g = self
            .directions
            .iter()
            .map(|b| (v.adjoint() * b * v)[(0, 0)].re)
            .collect();
        (vals[0], g)
    }
}

fn ascend(obj: &Objective, start: Vec<f64>, step0: f64, budget: usize) -> (f64, Vec<f64>, usize) {
    let mut x = start;
    let (mut best, _) = obj.eval(&x);
    let mut best_x = x.clone();
    let mut used = 0;
    for k in 1..=budget {
        used = k;
        let (_, g) = obj.eval(&x);
        let gn = g.iter().map(|t| t * t).sum::<f64>().sqrt();
        if gn < 1e-14 {
            break;
        }
        let step = step0 / k as f64;
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi += step * gi / gn;
        }
        let (f, _) = obj.eval(&x);
        if f > best {
            best = f;
            best_x = x.clone();
        }
    }
    (best, best_x, used)
}

/// `skt_cone_feasibility` for the real Aeppli class of `class`.
pub fn skt_cone_feasibility(hodge: &Hodge, class: &Form, seed: u64) -> Result<ConeMembershipResult> {
    let model = hodge.model;
    let n = model.n();
    check_real_class(hodge, class, Bidegree::new(1, 1))?;
    let scale_form = class.coeff_norm().max(1.0);
    let r = model.deldelbar(class).coeff_norm() / scale_form;
    if r > hodge.tol.eq.max(1e-9) {
        return Err(Error::Precondition(format!(
            "representative is not ∂∂̄-closed (residual {r:.3e})"
        )));
    }
    let h0 = hermitian_coefficients(class)?;
    let h0 = (&h0 + h0.adjoint()) * Complex::new(0.5, 0.0);
    let scale = h0.norm().max(f64::MIN_POSITIVE);

    // Real directions ∂̄u + ∂ū for u = φ^k and u = iφ^k.
    let mut generators = Vec::with_capacity(2 * n);
    for k in 1..=n {
        for c in [ONE, crate::algebra::I] {
            let u = model.phi(k).scale(c);
            generators.push(model.delbar(&u).add(&model.del(&u.conjugate())));
        }
    }
    let directions = generators
        .iter()
        .map(|g| hermitian_coefficients(g).map(|b| (&b + b.adjoint()) * Complex::new(0.5, 0.0)))
        .collect::<Result<Vec<_>>>()?;
    let active = directions.iter().any(|b| b.norm() > 1e-14);
    let obj = Objective { h0, directions };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 2 * n;
    let (mut best, mut best_x, mut iterations) = (f64::NEG_INFINITY, vec![0.0; dim], 0);
    let restarts = if active { RESTARTS } else { 1 };
    let budget = if active { MAX_ITERATIONS } else { 0 };
    for r in 0..restarts {
        let start: Vec<f64> = if r == 0 {
            vec![0.0; dim]
        } else {
            (0..dim).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
        };
        let (f, x, used) = ascend(&obj, start, scale, budget);
        iterations += used;
        if f > best {
            best = f;
            best_x = x;
        }
    }

    let mut result = ConeMembershipResult {
        verdict: Verdict::Inconclusive,
        best_min_eigenvalue: best,
        normalized_min_eigenvalue: best / scale,
        iterations,
        restarts,
        witness: None,
        certificate: None,
        witness_form: None,
    };

    if best > TAU_PD * scale {
        let mut rep = class.clone();
        for (g, &t) in generators.iter().zip(&best_x) {
            rep = rep.add(&g.scale_real(t));
        }
        let rep = rep.add(&rep.conjugate()).scale_real(0.5);
        let h = obj.matrix(&best_x);
        let class_residual = aeppli_class_distance(hodge, &rep, class)?;
        result.verdict = Verdict::FeasibleWithWitness;
        result.witness = Some(ConeWitness {
            representative: FormDoc::from_form(&rep.pruned(1e-15)),
            h: matrix_doc(&h),
            min_eigenvalue: hermitian_eigen(&h).0[0],
            class_residual,
        });
        result.witness_form = Some(rep);
        return Ok(result);
    }

    if model.is_unimodular() {
        let tau = TAU_PD * scale;
        let worst = stored_copsef_classes(hodge)
            .into_iter()
            .map(|(name, t)| (name, class.wedge(&t).integral().re))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        if let Some((name, pairing)) = worst {
            if pairing < -tau {
                result.verdict = Verdict::InfeasibleCertified;
                result.certificate = Some(Certificate { name, pairing });
            }
        }
    }
    Ok(result)
}

/// `‖(a)_h − (b)_h‖ / max(‖(b)_h‖, 1)` for Aeppli harmonic projections in `Λ^{1,1}`.
pub fn aeppli_class_distance(hodge: &Hodge, a: &Form, b: &Form) -> Result<f64> {
    let space = cohomology(hodge, Theory::Aeppli, Bidegree::new(1, 1))?;
    let pa = space.harmonic.project(hodge.metric, a)?;
    let pb = space.harmonic.project(hodge.metric, b)?;
    Ok((&pa - &pb).norm() / pb.norm().max(1.0))
}

/// Midpoint test: if both classes are feasible, the averaged witness certifies the midpoint.
#[derive(Clone, Debug, Serialize)]
pub struct ConvexityProbe {
    pub both_feasible: bool,
    pub midpoint_feasible: bool,
    pub averaged_min_eigenvalue: f64,
    pub averaged_class_residual: f64,
}

impl ConvexityProbe {
    pub fn passes(&self) -> bool {
        !self.both_feasible || (self.midpoint_feasible && self.averaged_min_eigenvalue > 0.0 && self.averaged_class_residual < 1e-8)
    }
}

pub fn convexity_probe(hodge: &Hodge, a: &Form, b: &Form, seed: u64) -> Result<ConvexityProbe> {
    let ra = skt_cone_feasibility(hodge, a, seed)?;
    let rb = skt_cone_feasibility(hodge, b, seed.wrapping_add(1))?;
    let mid = a.add(b).scale_real(0.5);
    let both = ra.verdict == Verdict::FeasibleWithWitness && rb.verdict == Verdict::FeasibleWithWitness;
    if !both {
        return Ok(ConvexityProbe {
            both_feasible: false,
            midpoint_feasible: false,
            averaged_min_eigenvalue: f64::NAN,
            averaged_class_residual: f64::NAN,
        });
    }
    let rm = skt_cone_feasibility(hodge, &mid, seed.wrapping_add(2))?;
    let avg = ra
        .witness_form
        .as_ref()
        .unwrap()
        .add(rb.witness_form.as_ref().unwrap())
        .scale_real(0.5);
    let h = hermitian_coefficients(&avg)?;
    Ok(ConvexityProbe {
        both_feasible: true,
        midpoint_feasible: rm.verdict == Verdict::FeasibleWithWitness,
        averaged_min_eigenvalue: hermitian_eigen(&h).0[0],
        averaged_class_residual: aeppli_class_distance(hodge, &avg, &mid)?,
    })
}

/// Openness: random real Aeppli-harmonic perturbations of relative size `eps · μ`
/// stay feasible, where `μ` is the witness min-eigenvalue of `class`.
#[derive(Clone, Debug, Serialize)]
pub struct OpennessProbe {
    pub mu: f64,
    pub perturbations: usize,
    pub feasible: usize,
    pub worst_min_eigenvalue: f64,
}

impl OpennessProbe {
    pub fn passes(&self) -> bool {
        self.feasible == self.perturbations
    }
}

pub fn openness_probe(hodge: &Hodge, class: &Form, eps: f64, count: usize, seed: u64) -> Result<OpennessProbe> {
    let base = skt_cone_feasibility(hodge, class, seed)?;
    if base.verdict != Verdict::FeasibleWithWitness {
        return Err(Error::Precondition("openness probe needs a feasible class".into()));
    }
    let mu = base.best_min_eigenvalue;
    let n = hodge.n();
    let space = cohomology(hodge, Theory::Aeppli, Bidegree::new(1, 1))?;
    let id = HermitianMetric::identity(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut feasible = 0;
    let mut worst = f64::INFINITY;
    for j in 0..count {
        let coords = DVector::from_fn(space.dim(), |_, _| {
            Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let delta = space.harmonic.combine(&coords);
        let delta = delta.add(&delta.conjugate()).scale_real(0.5);
        let size = id.norm(&delta);
        if size == 0.0 {
            feasible += 1;
            continue;
        }
        let delta = delta.scale_real(eps * mu / size);
        let r = skt_cone_feasibility(hodge, &class.add(&delta), seed.wrapping_add(j as u64 + 1))?;
        worst = worst.min(r.best_min_eigenvalue);
        if r.verdict == Verdict::FeasibleWithWitness {
            feasible += 1;
        }
    }
    Ok(OpennessProbe {
        mu,
        perturbations: count,
        feasible,
        worst_min_eigenvalue: worst,
    })
}

/// An SKT class offered as a probe; the metric is its witness.
#[derive(Clone, Debug)]
pub struct Probe {
    pub name: String,
    pub witness: Option<HermitianMetric>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CopsefVerdict {
    Consistent,
    Violated,
}

#[derive(Clone, Debug, Serialize)]
pub struct CopsefReport {
    pub verdict: CopsefVerdict,
    pub pairings: Vec<(String, f64)>,
    /// First probe with pairing below `−τ`.
    pub violated_by: Option<(String, f64)>,
    pub note: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<&'static str>,
}

/// `copsef_pairing_test`: pair a real BC `(n−1,n−1)`-class with SKT probe classes.
pub fn copsef_pairing_test(hodge: &Hodge, class: &Form, probes: &[Probe]) -> Result<CopsefReport> {
    let model = hodge.model;
    let n = model.n();
    check_real_class(hodge, class, Bidegree::new(n - 1, n - 1))?;
    if !model.is_unimodular() {
        return Err(Error::NotUnimodular("the co-pseudo-effective pairing"));
    }
    let norm = class.coeff_norm().max(1.0);
    let closed = model.del(class).coeff_norm().hypot(model.delbar(class).coeff_norm()) / norm;
    if closed > hodge.tol.eq.max(1e-9) {
        return Err(Error::Precondition(format!(
            "class representative is not ∂- and ∂̄-closed (residual {closed:.3e})"
        )));
    }
    let mut pairings = Vec::with_capacity(probes.len());
    for p in probes {
        let metric = p.witness.as_ref().ok_or_else(|| {
            Error::Precondition(format!("probe `{}` has no SKT witness", p.name))
        })?;
        if metric.n() != n {
            return Err(Error::Dimension(format!("probe `{}` has dimension {}", p.name, metric.n())));
        }
        let omega = metric.omega();
        let skt = model.deldelbar(omega).coeff_norm() / omega.coeff_norm();
        if skt > hodge.tol.eq {
            return Err(Error::Precondition(format!(
                "probe `{}` witness is not SKT (‖∂∂̄ω‖/‖ω‖ = {skt:.3e})",
                p.name
            )));
        }
        pairings.push((p.name.clone(), class.wedge(omega).integral().re));
    }
    let tau = TAU_PD * norm;
    let violated_by = pairings.iter().find(|(_, v)| *v < -tau).cloned();
    Ok(CopsefReport {
        verdict: if violated_by.is_some() { CopsefVerdict::Violated } else { CopsefVerdict::Consistent },
        pairings,
        violated_by,
        note: "consistent means no sampled probe separates the class; it is not a proof of membership",
        warning: probes.is_empty().then_some("empty probe list: nothing was tested"),
    })
}
