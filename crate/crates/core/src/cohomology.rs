//! Bott-Chern, Aeppli, Dolbeault and de Rham cohomology of a model, computed
//! twice: by quotient ranks of the raw operator matrices and as kernels of the
//! corresponding Laplacians. Also the Bott-Chern/Aeppli duality pairing, the
//! ω-primitive hyperplane of `H^{n−1,n−1}_BC` and the Lefschetz-type decomposition.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::algebra::{Bidegree, Complex, Form, FormSpace, ZERO};
use crate::error::{Error, Result};
use crate::hodge::{HarmonicSpace, Hodge};
use crate::linalg::{self, null_space, rank};
use crate::model::OperatorKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Theory {
    #[serde(rename = "BC")]
    BottChern,
    #[serde(rename = "A")]
    Aeppli,
    Dolbeault,
    #[serde(rename = "deRham")]
    DeRham,
}

impl Theory {
    pub const BIGRADED: [Theory; 3] = [Theory::BottChern, Theory::Aeppli, Theory::Dolbeault];

    pub fn label(self) -> &'static str {
        match self {
            Theory::BottChern => "BC",
            Theory::Aeppli => "A",
            Theory::Dolbeault => "Dolbeault",
            Theory::DeRham => "deRham",
        }
    }
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One cohomology group with its harmonic realization.
#[derive(Clone, Debug)]
pub struct CohomologySpace {
    pub theory: Theory,
    /// `None` for de Rham groups, which only carry `degree`.
    pub bidegree: Option<Bidegree>,
    pub degree: usize,
    pub quotient_dim: usize,
    pub harmonic: HarmonicSpace,
}

impl CohomologySpace {
    pub fn dim(&self) -> usize {
        self.harmonic.dim()
    }

    /// Class of a closed form (in the sense of the theory); its representative is
    /// the harmonic one.
    pub fn class_of(&self, hodge: &Hodge, u: &Form) -> Result<CohomologyClass> {
        let residual = closedness_residual(hodge, self.theory, u);
        if residual > hodge.tol.eq.max(1e-9) {
            return Err(Error::Precondition(format!(
                "form is not {}-closed (relative residual {residual:.3e})",
                self.theory
            )));
        }
        let coords = self.harmonic.project(hodge.metric, u)?;
        Ok(self.class_from_coords(coords))
    }

    pub fn class_from_coords(&self, coords: DVector<Complex>) -> CohomologyClass {
        assert_eq!(coords.len(), self.dim());
        CohomologyClass {
            theory: self.theory,
            representative: self.harmonic.combine(&coords),
            coords,
        }
    }

    pub fn zero_class(&self) -> CohomologyClass {
        self.class_from_coords(DVector::from_element(self.dim(), ZERO))
    }
}

/// A cohomology class stored by its coordinates in the orthonormal harmonic basis.
#[derive(Clone, Debug)]
pub struct CohomologyClass {
    pub theory: Theory,
    pub coords: DVector<Complex>,
    /// Harmonic representative.
    pub representative: Form,
}

impl CohomologyClass {
    pub fn bidegree(&self) -> Bidegree {
        self.representative.bidegree()
    }
}

/// Relative residual of the closedness condition of `theory` on `u`.
pub fn closedness_residual(hodge: &Hodge, theory: Theory, u: &Form) -> f64 {
    let model = hodge.model;
    let norm = u.coeff_norm();
    if norm == 0.0 {
        return 0.0;
    }
    let r = match theory {
        Theory::BottChern => {
            let (a, b) = (model.del(u), model.delbar(u));
            a.coeff_norm().hypot(b.coeff_norm())
        }
        Theory::Aeppli => model.deldelbar(u).coeff_norm(),
        Theory::Dolbeault => model.delbar(u).coeff_norm(),
        Theory::DeRham => {
            let (a, b) = model.differential(u);
            a.coeff_norm().hypot(b.coeff_norm())
        }
    };
    r / norm
}

/// `(quotient dimension, Laplacian-kernel dimension)` for a bigraded theory.
pub fn cohomology_dims(hodge: &Hodge, theory: Theory, b: Bidegree) -> (usize, HarmonicSpace) {
    let (p, q) = (b.p as isize, b.q as isize);
    let tol = hodge.tol.rank;
    let m = |kind, p, q| hodge.op(kind, p, q).matrix;
    let quotient = match theory {
        Theory::BottChern => {
            let closed = linalg::vstack(&[&m(OperatorKind::Del, p, q), &m(OperatorKind::Delbar, p, q)]);
            null_space(&closed, tol).ncols() - rank(&m(OperatorKind::DelDelbar, p - 1, q - 1), tol)
        }
        Theory::Aeppli => {
            let exact = linalg::hstack(&[
                &m(OperatorKind::Del, p - 1, q),
                &m(OperatorKind::Delbar, p, q - 1),
            ]);
            null_space(&m(OperatorKind::DelDelbar, p, q), tol).ncols() - rank(&exact, tol)
        }
        Theory::Dolbeault => {
            null_space(&m(OperatorKind::Delbar, p, q), tol).ncols()
                - rank(&m(OperatorKind::Delbar, p, q - 1), tol)
        }
        Theory::DeRham => panic!("use derham_cohomology for de Rham groups"),
    };
    let lap = match theory {
        Theory::BottChern => hodge.laplacian_bc(b),
        Theory::Aeppli => hodge.laplacian_a(b),
        _ => hodge.laplacian_delbar(b),
    };
    (quotient, hodge.harmonic_space(&lap))
}

/// `H^{p,q}` of a bigraded theory; the two computations must agree.
pub fn cohomology(hodge: &Hodge, theory: Theory, b: Bidegree) -> Result<CohomologySpace> {
    if b.p > hodge.n() || b.q > hodge.n() {
        return Err(Error::Dimension(format!("bidegree {b} out of range for n = {}", hodge.n())));
    }
    let (quotient_dim, harmonic) = cohomology_dims(hodge, theory, b);
    if quotient_dim != harmonic.dim() {
        return Err(Error::CrossCheck(format!(
            "{theory} {b}: quotient dimension {quotient_dim} but harmonic dimension {}",
            harmonic.dim()
        )));
    }
    Ok(CohomologySpace {
        theory,
        bidegree: Some(b),
        degree: b.degree(),
        quotient_dim,
        harmonic,
    })
}

/// `H^k_dR` by quotient rank and by the kernel of `Δ = dd* + d*d`.
pub fn derham_cohomology(hodge: &Hodge, k: usize) -> Result<CohomologySpace> {
    let tol = hodge.tol.rank;
    let out = hodge.d(k as isize).matrix;
    let inc = hodge.d(k as isize - 1).matrix;
    let quotient_dim = null_space(&out, tol).ncols() - rank(&inc, tol);
    let harmonic = hodge.harmonic_space(&hodge.laplacian_derham(k));
    if quotient_dim != harmonic.dim() {
        return Err(Error::CrossCheck(format!(
            "deRham degree {k}: quotient dimension {quotient_dim} but harmonic dimension {}",
            harmonic.dim()
        )));
    }
    Ok(CohomologySpace {
        theory: Theory::DeRham,
        bidegree: None,
        degree: k,
        quotient_dim,
        harmonic,
    })
}

fn require_unimodular(hodge: &Hodge, what: &'static str) -> Result<()> {
    if hodge.model.is_unimodular() {
        Ok(())
    } else {
        Err(Error::NotUnimodular(what))
    }
}

/// `{u}_BC . {v}_A = ∫ u ∧ v` for complementary bidegrees.
pub fn duality_pairing(hodge: &Hodge, bc: &CohomologyClass, a: &CohomologyClass) -> Result<Complex> {
    require_unimodular(hodge, "the duality pairing")?;
    let n = hodge.n();
    let (x, y) = (bc.bidegree(), a.bidegree());
    if bc.theory != Theory::BottChern || a.theory != Theory::Aeppli || x.p + y.p != n || x.q + y.q != n {
        return Err(Error::Dimension(format!(
            "pairing needs a BC class and an A class of complementary bidegrees, got {} {x} and {} {y}",
            bc.theory, a.theory
        )));
    }
    Ok(bc.representative.wedge(&a.representative).integral())
}

/// Matrix `P_{ij} = ∫ h_i ∧ k_j` between harmonic bases of `H^{p,q}_BC` and `H^{n−p,n−q}_A`.
pub fn duality_matrix(hodge: &Hodge, bc: &CohomologySpace, a: &CohomologySpace) -> Result<DMatrix<Complex>> {
    require_unimodular(hodge, "the duality pairing")?;
    let (hs, ks) = (bc.harmonic.forms(), a.harmonic.forms());
    Ok(DMatrix::from_fn(hs.len(), ks.len(), |i, j| hs[i].wedge(&ks[j]).integral()))
}

fn skt_residual(hodge: &Hodge) -> f64 {
    let omega = hodge.metric.omega();
    hodge.model.deldelbar(omega).coeff_norm() / omega.coeff_norm()
}

fn require_skt(hodge: &Hodge) -> Result<()> {
    let r = skt_residual(hodge);
    if r > hodge.tol.eq {
        return Err(Error::Precondition(format!(
            "metric is not SKT (‖∂∂̄ω‖/‖ω‖ = {r:.3e})"
        )));
    }
    Ok(())
}

/// Kernel of `[Γ]_BC ↦ [ω∧Γ]_A ∈ H^{n,n}_A ≃ C` inside `H^{n−1,n−1}_BC`.
#[derive(Clone, Debug)]
pub struct PrimitiveHyperplane {
    pub space: CohomologySpace,
    /// `r_i = ∫ ω ∧ h_i` over the harmonic basis.
    pub functional: DVector<Complex>,
    /// Columns are coordinates of a basis of the hyperplane.
    pub basis: DMatrix<Complex>,
}

impl PrimitiveHyperplane {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn codim(&self) -> usize {
        self.space.dim() - self.dim()
    }

    pub fn classes(&self) -> Vec<CohomologyClass> {
        (0..self.dim())
            .map(|j| self.space.class_from_coords(self.basis.column(j).into_owned()))
            .collect()
    }
}

pub fn primitive_hyperplane(hodge: &Hodge) -> Result<PrimitiveHyperplane> {
    require_skt(hodge)?;
    require_unimodular(hodge, "the primitive hyperplane")?;
    let n = hodge.n();
    let space = cohomology(hodge, Theory::BottChern, Bidegree::new(n - 1, n - 1))?;
    let omega = hodge.metric.omega();
    let functional = DVector::from_iterator(
        space.dim(),
        space.harmonic.forms().iter().map(|h| omega.wedge(h).integral()),
    );
    let row = DMatrix::from_row_slice(1, functional.len(), functional.as_slice());
    let basis = null_space(&row, hodge.tol.rank);
    Ok(PrimitiveHyperplane {
        space,
        functional,
        basis,
    })
}

/// Distance of `ω ∧ ∂∂̄Φ` from `Im ∂ + Im ∂̄` in `Λ^{n,n}`, relative to `‖ω‖‖∂∂̄Φ‖`.
/// Zero means the map `[Γ]_BC ↦ [ω∧Γ]_A` ignores the representative.
pub fn hyperplane_well_definedness(hodge: &Hodge, phi: &Form) -> Result<f64> {
    let n = hodge.n() as isize;
    let ddbar = hodge.model.deldelbar(phi);
    if ddbar.bidegree() != Bidegree::new(hodge.n() - 1, hodge.n() - 1) {
        return Err(Error::Dimension(format!(
            "Φ must have bidegree ({},{})",
            n - 2,
            n - 2
        )));
    }
    let top = hodge.metric.omega().wedge(&ddbar);
    let scale = hodge.metric.norm(hodge.metric.omega()) * hodge.metric.norm(&ddbar);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let exact = linalg::hstack(&[
        &hodge.metric.whitened(&hodge.op(OperatorKind::Del, n - 1, n)),
        &hodge.metric.whitened(&hodge.op(OperatorKind::Delbar, n, n - 1)),
    ]);
    let range = linalg::range_space(&exact, hodge.tol.rank);
    let space = FormSpace::single(hodge.n(), Bidegree::new(hodge.n(), hodge.n()));
    let x = hodge.metric.whitening(&space) * space.coords(&top)?;
    let residual = &x - &range * (range.adjoint() * &x);
    Ok(residual.norm() / scale)
}

/// `[Γ]_BC = [Γ]_prim + λ [(ω_{n−1})_h]_BC`.
#[derive(Clone, Debug, Serialize)]
pub struct LefschetzDecomposition {
    /// `[ω]_A . [Γ]_BC / ‖ω_h‖²`.
    pub lambda_formula: Complex,
    /// `⟨⟨Γ_h, (ω_{n−1})_h⟩⟩ / ‖(ω_{n−1})_h‖²`.
    pub lambda_projection: Complex,
    pub omega_h_norm_sq: f64,
    pub omega_n1_h_norm_sq: f64,
    /// Harmonic coordinates of the primitive part.
    #[serde(skip)]
    pub primitive: DVector<Complex>,
    /// Residual of the primitive part against the hyperplane functional.
    pub primitive_residual: f64,
}

impl LefschetzDecomposition {
    pub fn lambda(&self) -> Complex {
        self.lambda_formula
    }

    pub fn agreement(&self) -> f64 {
        (self.lambda_formula - self.lambda_projection).norm()
    }
}

/// Precomputed data for repeated decompositions under one SKT metric.
#[derive(Clone, Debug)]
pub struct Lefschetz {
    pub hyperplane: PrimitiveHyperplane,
    /// Harmonic coordinates of `[(ω_{n−1})_h]_BC`.
    pub omega_n1: DVector<Complex>,
    pub omega_h_norm_sq: f64,
}

impl Lefschetz {
    pub fn new(hodge: &Hodge) -> Result<Self> {
        let hyperplane = primitive_hyperplane(hodge)?;
        let omega = hodge.metric.omega();
        let aeppli = cohomology(hodge, Theory::Aeppli, Bidegree::new(1, 1))?;
        let omega_h = aeppli.harmonic.project(hodge.metric, omega)?;
        let omega_h_norm_sq = omega_h.norm_squared();
        let scale = hodge.metric.norm(omega).powi(2);
        if omega_h_norm_sq <= 1e-12 * scale {
            return Err(Error::CrossCheck(format!(
                "harmonic part of ω is degenerate (‖ω_h‖² = {omega_h_norm_sq:.3e})"
            )));
        }
        let omega_n1 = hyperplane
            .space
            .harmonic
            .project(hodge.metric, &hodge.metric.omega_power(hodge.n() - 1))?;
        Ok(Lefschetz {
            hyperplane,
            omega_n1,
            omega_h_norm_sq,
        })
    }

    pub fn space(&self) -> &CohomologySpace {
        &self.hyperplane.space
    }

    pub fn omega_n1_class(&self) -> CohomologyClass {
        self.space().class_from_coords(self.omega_n1.clone())
    }

    pub fn decompose(&self, class: &CohomologyClass) -> Result<LefschetzDecomposition> {
        if class.theory != Theory::BottChern || class.coords.len() != self.space().dim() {
            return Err(Error::Dimension(format!(
                "expected a BC class of bidegree {}, got {} {}",
                self.space().bidegree.unwrap(),
                class.theory,
                class.bidegree()
            )));
        }
        let pairing = self.hyperplane.functional.transpose() * &class.coords;
        let lambda_formula = pairing[(0, 0)] / self.omega_h_norm_sq;
        let w_sq = self.omega_n1.norm_squared();
        let lambda_projection = self.omega_n1.dotc(&class.coords) / w_sq;
        let primitive = &class.coords - &self.omega_n1 * lambda_formula;
        let f = &self.hyperplane.functional;
        let primitive_residual =
            (f.transpose() * &primitive)[(0, 0)].norm() / (f.norm() * class.coords.norm()).max(f64::MIN_POSITIVE);
        Ok(LefschetzDecomposition {
            lambda_formula,
            lambda_projection,
            omega_h_norm_sq: self.omega_h_norm_sq,
            omega_n1_h_norm_sq: w_sq,
            primitive,
            primitive_residual,
        })
    }

    /// `|⟨⟨(ω_{n−1})_h, Γ_h⟩⟩| / (‖(ω_{n−1})_h‖ ‖Γ_h‖)` for each hyperplane basis element.
    pub fn orthogonality_residuals(&self) -> Vec<f64> {
        let w = &self.omega_n1;
        self.hyperplane
            .classes()
            .iter()
            .map(|c| w.dotc(&c.coords).norm() / (w.norm() * c.coords.norm()))
            .collect()
    }
}

/// `lefschetz_decompose_class`.
pub fn lefschetz_decompose_class(hodge: &Hodge, class: &CohomologyClass) -> Result<LefschetzDecomposition> {
    Lefschetz::new(hodge)?.decompose(class)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Positive,
    Primitive,
    Negative,
}

/// Side of the primitive hyperplane on which a real class lies.
pub fn lambda_sign_partition(hodge: &Hodge, lefschetz: &Lefschetz, class: &CohomologyClass) -> Result<(Side, f64)> {
    let rep = &class.representative;
    let norm = rep.coeff_norm();
    let tol = hodge.tol.eq.max(1e-9);
    if norm > 0.0 && rep.reality_residual() > tol * norm {
        return Err(Error::Precondition(format!(
            "class is not real (conjugation residual {:.3e})",
            rep.reality_residual() / norm
        )));
    }
    let lambda = lefschetz.decompose(class)?.lambda_formula.re;
    // Compare the λ-component with the size of the class itself.
    let scale = class.coords.norm() / lefschetz.omega_n1.norm();
    let side = if lambda.abs() <= tol * scale.max(f64::MIN_POSITIVE) {
        Side::Primitive
    } else if lambda > 0.0 {
        Side::Positive
    } else {
        Side::Negative
    };
    Ok((side, lambda))
}

/// One row of a cohomology table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableEntry {
    pub theory: Theory,
    pub p: Option<usize>,
    pub q: Option<usize>,
    pub degree: usize,
    pub quotient_dim: usize,
    pub harmonic_dim: usize,
    pub agree: bool,
}

/// Every bigraded group of the three bigraded theories and every de Rham group.
pub fn cohomology_table(hodge: &Hodge) -> Vec<TableEntry> {
    let n = hodge.n();
    let mut out = Vec::new();
    for theory in Theory::BIGRADED {
        for p in 0..=n {
            for q in 0..=n {
                let (quotient_dim, harm) = cohomology_dims(hodge, theory, Bidegree::new(p, q));
                out.push(TableEntry {
                    theory,
                    p: Some(p),
                    q: Some(q),
                    degree: p + q,
                    quotient_dim,
                    harmonic_dim: harm.dim(),
                    agree: quotient_dim == harm.dim(),
                });
            }
        }
    }
    for k in 0..=2 * n {
        let tol = hodge.tol.rank;
        let quotient_dim = null_space(&hodge.d(k as isize).matrix, tol).ncols()
            - rank(&hodge.d(k as isize - 1).matrix, tol);
        let harmonic_dim = hodge.harmonic_space(&hodge.laplacian_derham(k)).dim();
        out.push(TableEntry {
            theory: Theory::DeRham,
            p: None,
            q: None,
            degree: k,
            quotient_dim,
            harmonic_dim,
            agree: quotient_dim == harmonic_dim,
        });
    }
    out
}
