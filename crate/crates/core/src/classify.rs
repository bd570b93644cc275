//! Metric taxonomy (Kähler, balanced, Gauduchon, strongly Gauduchon, SKT,
//! Hermitian-symplectic) with residuals and witnesses, the non-vanishing
//! certificate for the Aeppli class of an SKT metric, weak positivity of top
//! forms, Aeppli-harmonicity of `ω∧φ` and power-exactness witnesses.

use nalgebra::DVector;
use serde::Serialize;

use crate::algebra::{Bidegree, Complex, Form, FormDoc, FormSpace, ZERO};
use crate::error::{Error, Result};
use crate::hodge::Hodge;
use crate::linalg::{self, lstsq};
use crate::model::{LieModel, OperatorKind};

/// Relative residuals of the equational predicates and of the least-squares
/// systems behind the existential ones.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Residuals {
    pub kahler: f64,
    pub balanced: f64,
    pub gauduchon: f64,
    pub strongly_gauduchon: f64,
    pub skt: f64,
    pub hermitian_symplectic: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witnesses {
    /// `Γ` of bidegree `(n, n−2)` with `∂̄Γ = ∂ω^{n−1}`.
    pub strongly_gauduchon: Option<FormDoc>,
    /// `α` of bidegree `(2,0)` with `∂α = 0` and `∂̄α = −∂ω`.
    pub hermitian_symplectic: Option<FormDoc>,
}

/// The literal reading with `α` of bidegree `(0,2)`: `∂̄α` lands in `(0,3)` while
/// `∂ω` is `(2,1)`, so the equation forces `∂ω = 0` and `∂̄α = 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrictHermitianSymplectic {
    pub holds: bool,
    pub residual: f64,
    pub note: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricClassification {
    pub kahler: bool,
    pub balanced: bool,
    pub gauduchon: bool,
    pub strongly_gauduchon: bool,
    pub skt: bool,
    pub hermitian_symplectic: bool,
    pub residuals: Residuals,
    pub witnesses: Witnesses,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strict_hermitian_symplectic: Option<StrictHermitianSymplectic>,
}

impl MetricClassification {
    /// Violated implications among the verdicts; empty when consistent.
    pub fn inconsistencies(&self, n: usize) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.kahler && !(self.balanced && self.skt && self.hermitian_symplectic) {
            out.push("kahler without balanced, skt and hermitian_symplectic");
        }
        if self.balanced && !self.strongly_gauduchon {
            out.push("balanced without strongly_gauduchon");
        }
        if self.strongly_gauduchon && !self.gauduchon {
            out.push("strongly_gauduchon without gauduchon");
        }
        if self.hermitian_symplectic && !self.skt {
            out.push("hermitian_symplectic without skt");
        }
        if n == 2 && self.skt != self.gauduchon {
            out.push("n = 2 but skt differs from gauduchon");
        }
        if n == 2 && self.balanced != self.kahler {
            out.push("n = 2 but balanced differs from kahler");
        }
        out
    }
}

fn rel(num: f64, den: f64) -> f64 {
    let r = if den == 0.0 { num } else { num / den };
    r.abs()
}

fn d_norm(model: &LieModel, u: &Form) -> f64 {
    let (a, b) = model.differential(u);
    a.coeff_norm().hypot(b.coeff_norm())
}

/// Minimum-norm solution of a stacked linear system over forms, with the
/// relative residual `‖A x − b‖ / scale`.
fn solve(blocks: &[nalgebra::DMatrix<Complex>], rhs: &[DVector<Complex>], rank_tol: Option<f64>, scale: f64) -> (DVector<Complex>, f64) {
    let refs: Vec<_> = blocks.iter().collect();
    let a = linalg::vstack(&refs);
    let mut b = DVector::from_element(a.nrows(), ZERO);
    let mut off = 0;
    for r in rhs {
        b.rows_mut(off, r.len()).copy_from(r);
        off += r.len();
    }
    let x = lstsq(&a, &b, rank_tol);
    let res = (&a * &x - &b).norm();
    (x, rel(res, scale))
}

/// `classify_metric`. With `strict`, the literal `(0,2)` Hermitian-symplectic
/// reading is reported alongside.
pub fn classify_metric(hodge: &Hodge, strict: bool) -> MetricClassification {
    let model = hodge.model;
    let n = model.n();
    let tol = hodge.tol.eq;
    let omega = hodge.metric.omega();
    let wn = omega.coeff_norm();
    let omega_n1 = omega.power(n - 1);
    let wn1 = omega_n1.coeff_norm();

    let kahler = rel(d_norm(model, omega), wn);
    let balanced = rel(d_norm(model, &omega_n1), wn1);
    let gauduchon = rel(model.deldelbar(&omega_n1).coeff_norm(), wn1);
    let skt = rel(model.deldelbar(omega).coeff_norm(), wn);

    // ∂̄Γ = ∂ω^{n−1} with Γ ∈ Λ^{n,n−2}
    let (strongly_gauduchon, sg_witness) = if n < 2 {
        (0.0, None)
    } else {
        let target = model.del(&omega_n1);
        let op = hodge.op(OperatorKind::Delbar, n as isize, n as isize - 2);
        let rhs = FormSpace::single(n, Bidegree::new(n, n - 1))
            .coords(&target)
            .expect("∂ω^{n−1} has bidegree (n, n−1)");
        let (x, r) = solve(&[op.matrix], &[rhs], hodge.tol.rank, wn1);
        (r, Some(Form::from_vector(n, Bidegree::new(n, n - 2), x.as_slice())))
    };

    // ∂α = 0, ∂̄α = −∂ω with α ∈ Λ^{2,0}
    let (hermitian_symplectic, hs_witness) = if n < 2 {
        (0.0, None)
    } else {
        let del_omega = model.del(omega);
        let a = hodge.op(OperatorKind::Del, 2, 0);
        let b = hodge.op(OperatorKind::Delbar, 2, 0);
        let rhs0 = DVector::from_element(a.codomain.dim(), ZERO);
        let rhs1 = FormSpace::single(n, Bidegree::new(2, 1))
            .coords(&del_omega)
            .expect("∂ω has bidegree (2,1)")
            * Complex::new(-1.0, 0.0);
        let (x, r) = solve(&[a.matrix, b.matrix], &[rhs0, rhs1], hodge.tol.rank, wn);
        (r, Some(Form::from_vector(n, Bidegree::new(2, 0), x.as_slice())))
    };

    let strict_hermitian_symplectic = strict.then(|| {
        let r = rel(model.del(omega).coeff_norm(), wn);
        StrictHermitianSymplectic {
            holds: r <= tol,
            residual: r,
            note: "literal (0,2) reading: ∂̄α is (0,3) and ∂ω is (2,1), so it holds only when ∂ω = 0",
        }
    });

    let residuals = Residuals {
        kahler,
        balanced,
        gauduchon,
        strongly_gauduchon,
        skt,
        hermitian_symplectic,
    };
    let ok = |r: f64| r <= tol;
    let witness = |w: Option<Form>, holds: bool| {
        w.filter(|_| holds).map(|f| FormDoc::from_form(&f.pruned(1e-15)))
    };
    MetricClassification {
        kahler: ok(kahler),
        balanced: ok(balanced),
        gauduchon: ok(gauduchon),
        strongly_gauduchon: ok(strongly_gauduchon),
        skt: ok(skt),
        hermitian_symplectic: ok(hermitian_symplectic),
        witnesses: Witnesses {
            strongly_gauduchon: witness(sg_witness, ok(strongly_gauduchon)),
            hermitian_symplectic: witness(hs_witness, ok(hermitian_symplectic)),
        },
        residuals,
        strict_hermitian_symplectic,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Positive,
    Zero,
    Negative,
}

/// Sign of a real `(n,n)`-form against the positive volume element. `tol` is an
/// absolute threshold on the integral.
pub fn weak_positivity_topform(u: &Form, tol: f64) -> Result<Sign> {
    let n = u.n();
    if u.bidegree() != Bidegree::new(n, n) {
        return Err(Error::Dimension(format!("expected an ({n},{n})-form, got {}", u.bidegree())));
    }
    if u.reality_residual() > 1e-12 * u.coeff_norm().max(1.0) {
        return Err(Error::Precondition("top form is not real".into()));
    }
    let c = u.integral().re;
    Ok(if c > tol {
        Sign::Positive
    } else if c < -tol {
        Sign::Negative
    } else {
        Sign::Zero
    })
}

/// Certificate that `[ω]_A ≠ 0` for an SKT metric.
#[derive(Clone, Debug, Serialize)]
pub struct SktCertificate {
    /// `L²` distance from `ω` to `Im ∂ + Im ∂̄` in `Λ^{1,1}`.
    pub distance: f64,
    pub omega_norm: f64,
    pub relative_distance: f64,
    pub nonzero: bool,
    /// `α ∈ Λ^{0,1}` and `β ∈ Λ^{1,0}` of the best fit `ω ≈ ∂α + ∂̄β`.
    pub alpha: FormDoc,
    pub beta: FormDoc,
    /// `∫ Σ_j C_j (∂̄α)^j ∧ (∂β)^j ∧ ω^{n−2j}`, `C_j = n!/(j!² (n−2j)!)`.
    pub positivity_integral: f64,
    pub positivity: Sign,
}

pub fn skt_class_nonzero(hodge: &Hodge) -> Result<SktCertificate> {
    let model = hodge.model;
    let metric = hodge.metric;
    let n = model.n();
    let omega = metric.omega();
    let skt = rel(model.deldelbar(omega).coeff_norm(), omega.coeff_norm());
    if skt > hodge.tol.eq {
        return Err(Error::Precondition(format!("metric is not SKT (‖∂∂̄ω‖/‖ω‖ = {skt:.3e})")));
    }
    let del = hodge.op(OperatorKind::Del, 0, 1);
    let delbar = hodge.op(OperatorKind::Delbar, 1, 0);
    let a = linalg::hstack(&[&metric.whitened(&del), &metric.whitened(&delbar)]);
    let space = FormSpace::single(n, Bidegree::new(1, 1));
    let target = metric.whitening(&space) * space.coords(omega)?;
    let x = lstsq(&a, &target, hodge.tol.rank);
    let distance = (&a * &x - &target).norm();
    let omega_norm = metric.norm(omega);

    let d01 = Bidegree::new(0, 1).dim(n);
    let s01 = FormSpace::single(n, Bidegree::new(0, 1));
    let s10 = FormSpace::single(n, Bidegree::new(1, 0));
    let alpha = s01.form(&(metric.unwhitening(&s01) * x.rows(0, d01)));
    let beta = s10.form(&(metric.unwhitening(&s10) * x.rows(d01, x.len() - d01)));

    let top = lemma_topform(model, omega, &alpha, &beta);
    let integral = top.integral().re;
    let positivity = weak_positivity_topform(&top, 1e-12 * omega_norm.powi(2).max(1.0))?;
    Ok(SktCertificate {
        distance,
        omega_norm,
        relative_distance: distance / omega_norm,
        nonzero: distance > hodge.tol.eq * omega_norm,
        alpha: FormDoc::from_form(&alpha.pruned(1e-15)),
        beta: FormDoc::from_form(&beta.pruned(1e-15)),
        positivity_integral: integral,
        positivity,
    })
}

/// `Σ_j n!/(j!² (n−2j)!) (∂̄α)^j ∧ (∂β)^j ∧ ω^{n−2j}`, made real by averaging with its conjugate.
pub fn lemma_topform(model: &LieModel, omega: &Form, alpha: &Form, beta: &Form) -> Form {
    let n = model.n();
    let fact = |k: usize| (1..=k).map(|j| j as f64).product::<f64>();
    let da = model.delbar(alpha);
    let db = model.del(beta);
    let mut top = Form::zero(n, Bidegree::new(n, n));
    for j in 0..=n / 2 {
        let c = fact(n) / (fact(j) * fact(j) * fact(n - 2 * j));
        let term = da.power(j).wedge(&db.power(j)).wedge(&omega.power(n - 2 * j));
        if term.bidegree() == top.bidegree() {
            top = top.add(&term.scale_real(c));
        }
    }
    top.add(&top.conjugate()).scale_real(0.5)
}

/// `(‖∂*(ω∧φ)‖, ‖∂̄*(ω∧φ)‖, ‖Δ_A(ω∧φ)‖)` in the `L²` norm.
#[derive(Clone, Debug, Serialize)]
pub struct AeppliHarmonicCheck {
    pub del_star: f64,
    pub delbar_star: f64,
    pub laplacian: f64,
    pub phi_norm: f64,
}

impl AeppliHarmonicCheck {
    pub fn max(&self) -> f64 {
        self.del_star.max(self.delbar_star).max(self.laplacian)
    }
}

pub fn aeppli_harmonic_check(hodge: &Hodge, phi: &Form) -> Result<AeppliHarmonicCheck> {
    let model = hodge.model;
    let metric = hodge.metric;
    let n = model.n();
    let b = phi.bidegree();
    let tol = hodge.tol.eq.max(1e-9);
    let mut failures = Vec::new();
    if b.degree() + 1 != n {
        failures.push(format!("φ has degree {} but must have degree n − 1 = {}", b.degree(), n - 1));
    }
    let omega = metric.omega();
    let skt = rel(model.deldelbar(omega).coeff_norm(), omega.coeff_norm());
    if skt > hodge.tol.eq {
        failures.push(format!("metric is not SKT (‖∂∂̄ω‖/‖ω‖ = {skt:.3e})"));
    }
    let norm = phi.coeff_norm();
    let r = rel(model.del(phi).coeff_norm(), norm);
    if r > tol {
        failures.push(format!("φ is not ∂-closed (relative residual {r:.3e})"));
    }
    let r = rel(model.delbar(phi).coeff_norm(), norm);
    if r > tol {
        failures.push(format!("φ is not ∂̄-closed (relative residual {r:.3e})"));
    }
    let r = metric.primitivity_residual(phi);
    if r > tol {
        failures.push(format!("φ is not primitive (‖Λφ‖/‖φ‖ = {r:.3e})"));
    }
    if !failures.is_empty() {
        return Err(Error::Precondition(failures.join("; ")));
    }
    let u = omega.wedge(phi);
    let ub = u.bidegree();
    let (p, q) = (ub.p as isize, ub.q as isize);
    let apply = |op: &crate::model::BigradedOperator| -> f64 {
        if op.domain.dim() == 0 || op.codomain.dim() == 0 {
            return 0.0;
        }
        let v = op.matrix.clone() * FormSpace::single(n, ub).coords(&u).unwrap();
        let w = metric.whitening(&op.codomain) * v;
        w.norm()
    };
    Ok(AeppliHarmonicCheck {
        del_star: apply(&hodge.del_star(p, q)),
        delbar_star: apply(&hodge.delbar_star(p, q)),
        laplacian: apply(&hodge.laplacian_a(ub)),
        phi_norm: metric.norm(phi),
    })
}

/// `β' = β∧a^{p−1}`, `γ' = γ∧a^{p−1}` with `a^p = ∂β' + ∂̄γ'`.
#[derive(Clone, Debug)]
pub struct PowerWitness {
    pub beta: Form,
    pub gamma: Form,
    /// `‖a^p − ∂β' − ∂̄γ'‖ / max(‖a‖^p, 1)`.
    pub residual: f64,
}

pub fn power_exactness_witness(model: &LieModel, a: &Form, beta: &Form, gamma: &Form, p: usize, tol: f64) -> Result<PowerWitness> {
    if p == 0 {
        return Err(Error::Precondition("power must be at least 1".into()));
    }
    let scale = a.coeff_norm().max(1.0);
    let closed = model.del(a).coeff_norm().hypot(model.delbar(a).coeff_norm()) / scale;
    if closed > tol {
        return Err(Error::Precondition(format!("a is not d-closed (residual {closed:.3e})")));
    }
    let (db, dg) = (model.del(beta), model.delbar(gamma));
    if db.bidegree() != a.bidegree() || dg.bidegree() != a.bidegree() {
        return Err(Error::Dimension(format!(
            "∂β and ∂̄γ must share the bidegree of a = {}",
            a.bidegree()
        )));
    }
    let exact = a.sub(&db.add(&dg)).coeff_norm() / scale;
    if exact > tol {
        return Err(Error::Precondition(format!(
            "a ≠ ∂β + ∂̄γ (residual {exact:.3e})"
        )));
    }
    let power = a.power(p - 1);
    let beta_p = beta.wedge(&power);
    let gamma_p = gamma.wedge(&power);
    let ap = a.power(p);
    let diff = ap.sub(&model.del(&beta_p).add(&model.delbar(&gamma_p)));
    let residual = diff.coeff_norm() / a.coeff_norm().powi(p as i32).max(1.0);
    if residual > tol {
        return Err(Error::CrossCheck(format!(
            "a^{p} ≠ ∂β' + ∂̄γ' (residual {residual:.3e})"
        )));
    }
    Ok(PowerWitness {
        beta: beta_p,
        gamma: gamma_p,
        residual,
    })
}
