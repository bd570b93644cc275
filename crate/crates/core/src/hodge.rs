//! Hermitian metrics, `L²` Gram structures, the Hodge star, Gram adjoints, the
//! Bott-Chern, Aeppli, Dolbeault and de Rham Laplacians, harmonic spaces and the
//! Lefschetz operators.
//!
//! Forms are always expressed in the canonical coframe `φ`. Internally the metric
//! `h = L L*` (Cholesky) defines the unitary coframe `θ = Lᵀ φ`, in which basis
//! monomials are orthonormal and the star is a signed permutation. Every operator
//! is carried back to `φ`-coordinates by compound matrices of `Lᵀ`.
//!
//! Integration is normalized against the identity-metric volume form, so a metric
//! `h` has total volume `det h` and `⟨⟨u, v⟩⟩ = det h · ⟨u, v⟩_pointwise`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    basis, subsets, Bidegree, Complex, Form, FormSpace, MultiIndex, I, ONE, ZERO,
};
use crate::algebra::merge_sign;
use crate::error::{Error, Result};
use crate::linalg::{self, block_diag, hermitian_eigen, minor, range_space};
use crate::model::{BigradedOperator, LieModel, OperatorKind};

/// Numerical thresholds shared by every module.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// Relative factor of the rank/kernel threshold `τ = factor · σ_max`.
    /// `None` uses `dim · ε`.
    pub rank: Option<f64>,
    /// Relative residual below which an equation counts as satisfied.
    pub eq: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank: None,
            eq: 1e-9,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct MetricDoc {
    name: String,
    h: Vec<Vec<[f64; 2]>>,
}

/// Positive-definite Hermitian coefficient matrix `h` with `ω = i Σ h_{jk} φ^j∧φ̄^k`.
#[derive(Clone, Debug)]
pub struct HermitianMetric {
    name: String,
    n: usize,
    h: DMatrix<Complex>,
    omega: Form,
    volume: f64,
    /// `Lᵀ`, so that `θ = Lᵀ φ`.
    frame: DMatrix<Complex>,
    /// Per bidegree `(p, q)` at index `p (n+1) + q`: `φ`-coordinates to `θ`-coordinates.
    to_frame: Vec<DMatrix<Complex>>,
    from_frame: Vec<DMatrix<Complex>>,
}

impl HermitianMetric {
    /// Validate `h` and build `ω`, the Cholesky coframe and per-bidegree transforms.
    pub fn new(name: impl Into<String>, h: DMatrix<Complex>) -> Result<Self> {
        let n = h.nrows();
        if n == 0 || h.ncols() != n {
            return Err(Error::Metric(format!(
                "h must be a non-empty square matrix, got {}x{}",
                h.nrows(),
                h.ncols()
            )));
        }
        let scale = linalg::max_abs(&h).max(f64::MIN_POSITIVE);
        if (&h - h.adjoint()).iter().any(|c| c.norm() > 1e-12 * scale) {
            return Err(Error::Metric("h is not Hermitian".into()));
        }
        let (eigs, _) = hermitian_eigen(&h);
        let lmax = eigs.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        if eigs[0] <= linalg::threshold(lmax, n, n, None) {
            return Err(Error::Metric(format!(
                "not positive definite (minimum eigenvalue {:.3e})",
                eigs[0]
            )));
        }
        let chol = h
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Metric("not positive definite (Cholesky failed)".into()))?;
        let l = chol.l();
        let frame = l.transpose();
        let inverse = frame
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Metric("singular coframe".into()))?;

        let mut omega = Form::zero(n, Bidegree::new(1, 1));
        for j in 0..n {
            for k in 0..n {
                let c = h[(j, k)] * I;
                if c != ZERO {
                    omega = omega.add(&Form::term(n, &[j + 1], &[k + 1], c)?);
                }
            }
        }
        let volume = eigs.iter().product::<f64>();

        let mut to_frame = Vec::with_capacity((n + 1) * (n + 1));
        let mut from_frame = Vec::with_capacity((n + 1) * (n + 1));
        for p in 0..=n {
            for q in 0..=n {
                let b = Bidegree::new(p, q);
                // φ^I = Σ_A det(M[I,A]) θ^A with M = (Lᵀ)^{-1}
                to_frame.push(compound(n, b, |i, a| minor(&inverse, i, a)));
                // θ^A = Σ_I det(Lᵀ[A,I]) φ^I
                from_frame.push(compound(n, b, |i, a| minor(&frame, a, i)).transpose());
            }
        }
        Ok(HermitianMetric {
            name: name.into(),
            n,
            h,
            omega,
            volume,
            frame,
            to_frame,
            from_frame,
        })
    }

    /// `metric_from_matrix`: build a metric for `model`, checking the dimension.
    pub fn for_model(model: &LieModel, name: impl Into<String>, h: DMatrix<Complex>) -> Result<Self> {
        if h.nrows() != model.n() {
            return Err(Error::Metric(format!(
                "metric is {}x{} but the model has dimension {}",
                h.nrows(),
                h.ncols(),
                model.n()
            )));
        }
        HermitianMetric::new(name, h)
    }

    pub fn identity(n: usize) -> Self {
        HermitianMetric::new(format!("identity{n}"), DMatrix::identity(n, n))
            .expect("identity is positive definite")
    }

    /// `h = A A* + δ I` with Gaussian `A`; well conditioned for small `n`.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let a = DMatrix::from_fn(n, n, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex::new(re, im) * (0.5 / (n as f64).sqrt())
        });
        let h = &a * a.adjoint() + DMatrix::identity(n, n) * Complex::new(0.5, 0.0);
        HermitianMetric::new("random", h).expect("random metric is positive definite")
    }

    pub fn from_json(model: &LieModel, text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let doc: MetricDoc = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::parse(path, e.into_inner().to_string())
        })?;
        let n = doc.h.len();
        for (r, row) in doc.h.iter().enumerate() {
            if row.len() != n {
                return Err(Error::parse(
                    format!("h[{r}]"),
                    format!("row has {} entries, expected {n}", row.len()),
                ));
            }
        }
        let h = DMatrix::from_fn(n, n, |r, c| Complex::new(doc.h[r][c][0], doc.h[r][c][1]));
        HermitianMetric::for_model(model, doc.name, h)
    }

    pub fn to_json(&self) -> String {
        let doc = MetricDoc {
            name: self.name.clone(),
            h: (0..self.n)
                .map(|r| (0..self.n).map(|c| [self.h[(r, c)].re, self.h[(r, c)].im]).collect())
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("metric serializes")
    }

    /// Metric whose `ω` is the given real positive `(1,1)`-form.
    pub fn from_form(name: impl Into<String>, omega: &Form) -> Result<Self> {
        HermitianMetric::new(name, hermitian_coefficients(omega)?)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> &DMatrix<Complex> {
        &self.h
    }

    pub fn omega(&self) -> &Form {
        &self.omega
    }

    /// `ω_k = ω^k / k!`.
    pub fn omega_power(&self, k: usize) -> Form {
        let fact: f64 = (1..=k).map(|j| j as f64).product();
        self.omega.power(k).scale_real(1.0 / fact)
    }

    /// `∫ dV_ω = det h`.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// `dV_ω = ω_n`.
    pub fn volume_form(&self) -> Form {
        self.omega_power(self.n)
    }

    /// Unitary coframe `θ = Lᵀ φ` as a matrix.
    pub fn coframe(&self) -> &DMatrix<Complex> {
        &self.frame
    }

    fn slot(&self, b: Bidegree) -> usize {
        b.p * (self.n + 1) + b.q
    }

    /// `√vol · T`, mapping canonical coordinates to `L²`-orthonormal ones.
    pub fn whitening(&self, space: &FormSpace) -> DMatrix<Complex> {
        let s = Complex::new(self.volume.sqrt(), 0.0);
        let blocks: Vec<_> = space
            .parts()
            .iter()
            .map(|&b| &self.to_frame[self.slot(b)] * s)
            .collect();
        block_diag(&blocks)
    }

    pub fn unwhitening(&self, space: &FormSpace) -> DMatrix<Complex> {
        let s = Complex::new(1.0 / self.volume.sqrt(), 0.0);
        let blocks: Vec<_> = space
            .parts()
            .iter()
            .map(|&b| &self.from_frame[self.slot(b)] * s)
            .collect();
        block_diag(&blocks)
    }

    /// `L²` Gram matrix: `⟨⟨u, v⟩⟩ = v* G u`.
    pub fn gram(&self, space: &FormSpace) -> DMatrix<Complex> {
        let w = self.whitening(space);
        w.adjoint() * w
    }

    pub fn gram_inverse(&self, space: &FormSpace) -> DMatrix<Complex> {
        let w = self.unwhitening(space);
        &w * w.adjoint()
    }

    /// `⟨⟨u, v⟩⟩`, complex-linear in `u`.
    pub fn inner(&self, u: &Form, v: &Form) -> Complex {
        if u.bidegree() != v.bidegree() {
            return ZERO;
        }
        let space = FormSpace::single(self.n, u.bidegree());
        let w = self.whitening(&space);
        let (x, y) = (&w * u.to_vector(), &w * v.to_vector());
        y.dotc(&x)
    }

    pub fn norm(&self, u: &Form) -> f64 {
        self.inner(u, u).re.max(0.0).sqrt()
    }

    /// Gram adjoint `A*` with `⟨⟨A u, v⟩⟩ = ⟨⟨u, A* v⟩⟩`.
    pub fn adjoint(&self, a: &BigradedOperator) -> BigradedOperator {
        let matrix = self.gram_inverse(&a.domain) * a.matrix.adjoint() * self.gram(&a.codomain);
        BigradedOperator {
            domain: a.codomain.clone(),
            codomain: a.domain.clone(),
            matrix,
        }
    }

    /// Operator in orthonormal coordinates, where the adjoint is the conjugate transpose.
    pub fn whitened(&self, a: &BigradedOperator) -> DMatrix<Complex> {
        self.whitening(&a.codomain) * &a.matrix * self.unwhitening(&a.domain)
    }

    /// The Hodge star `⋆: Λ^{p,q} → Λ^{n−q,n−p}`, complex linear.
    pub fn star(&self, space: &FormSpace) -> BigradedOperator {
        let n = self.n;
        let codomain = FormSpace::new(
            n,
            space.parts().iter().map(|b| Bidegree::new(n - b.q, n - b.p)).collect(),
        );
        let mut matrix = DMatrix::from_element(codomain.dim(), space.dim(), ZERO);
        let mut col0 = 0;
        for &b in space.parts() {
            let target = Bidegree::new(n - b.q, n - b.p);
            let row0 = codomain.offset(target).unwrap();
            let block = &self.from_frame[self.slot(target)]
                * star_in_frame(n, b)
                * &self.to_frame[self.slot(b)];
            matrix
                .view_mut((row0, col0), block.shape())
                .copy_from(&block);
            col0 += b.dim(n);
        }
        BigradedOperator {
            domain: space.clone(),
            codomain,
            matrix,
        }
    }

    pub fn star_form(&self, u: &Form) -> Form {
        let op = self.star(&FormSpace::single(self.n, u.bidegree()));
        op.apply_single(u).expect("bidegree matches")
    }

    /// Left multiplication by a fixed form.
    pub fn wedge_operator(form: &Form, space: &FormSpace) -> BigradedOperator {
        let n = space.n();
        let b = form.bidegree();
        let codomain = space.shifted(b.p as isize, b.q as isize);
        let mut matrix = DMatrix::from_element(codomain.dim(), space.dim(), ZERO);
        let mut col = 0;
        for &part in space.parts() {
            for mi in basis(n, part) {
                let img = form.wedge(&Form::monomial(n, mi, ONE));
                if let Some(off) = codomain.offset(img.bidegree()) {
                    for (t, &c) in img.terms() {
                        matrix[(off + crate::algebra::basis_position(n, t), col)] += c;
                    }
                }
                col += 1;
            }
        }
        BigradedOperator {
            domain: space.clone(),
            codomain,
            matrix,
        }
    }

    /// `L^k = ω^k ∧ ·`.
    pub fn lefschetz(&self, k: usize, space: &FormSpace) -> BigradedOperator {
        HermitianMetric::wedge_operator(&self.omega.power(k), space)
    }

    /// `Λ_ω` on `space`, the Gram adjoint of `L` into `space`.
    pub fn lambda(&self, space: &FormSpace) -> BigradedOperator {
        let lower = space.shifted(-1, -1);
        let l = embed(&self.lefschetz(1, &lower), space);
        let adj = self.adjoint(&l);
        debug_assert_eq!(adj.domain, *space);
        adj
    }

    pub fn lambda_form(&self, u: &Form) -> Form {
        let space = FormSpace::single(self.n, u.bidegree());
        let op = self.lambda(&space);
        match op.codomain.parts() {
            [] => Form::zero(self.n, u.bidegree()),
            _ => op.apply_single(u).expect("bidegree matches"),
        }
    }

    /// Orthogonal projection of `u` onto `ker Λ_ω = (Im L)^⊥`, the primitive forms of its bidegree.
    pub fn primitive_part(&self, u: &Form) -> Form {
        let b = u.bidegree();
        let space = FormSpace::single(self.n, b);
        let lower = space.shifted(-1, -1);
        if lower.dim() == 0 || space.dim() == 0 {
            return u.clone();
        }
        let w = self.whitening(&space) * u.to_vector();
        let l = embed(&self.lefschetz(1, &lower), &space);
        let r = range_space(&self.whitened(&l), None);
        let w = &w - &r * (r.adjoint() * &w);
        space.form(&(self.unwhitening(&space) * w))
    }

    /// `‖Λ_ω u‖ / ‖u‖`.
    pub fn primitivity_residual(&self, u: &Form) -> f64 {
        let norm = self.norm(u);
        if norm == 0.0 {
            return 0.0;
        }
        self.norm(&self.lambda_form(u)) / norm
    }

    /// `‖ω_{n−k+1} ∧ u‖ / (‖ω_{n−k+1}‖ ‖u‖)` for a `k`-form; the wedge-side
    /// primitivity test. For `k > n` only the zero form is primitive.
    pub fn primitivity_residual_by_wedge(&self, u: &Form) -> f64 {
        let k = u.degree();
        let norm = self.norm(u);
        if norm == 0.0 {
            return 0.0;
        }
        if k > self.n {
            return 1.0;
        }
        let power = self.omega_power(self.n - k + 1);
        let w = power.wedge(u);
        let denom = self.norm(&power) * norm;
        if w.bidegree().p > self.n || w.bidegree().q > self.n {
            return 0.0;
        }
        let ws = FormSpace::single(self.n, w.bidegree());
        if ws.dim() == 0 {
            return 0.0;
        }
        self.norm(&w) / denom
    }
}

/// `H` with `u = i Σ H_{jk} φ^j∧φ̄^k` for a `(1,1)`-form `u`.
pub fn hermitian_coefficients(u: &Form) -> Result<DMatrix<Complex>> {
    if u.bidegree() != Bidegree::new(1, 1) {
        return Err(Error::Dimension(format!(
            "expected a (1,1)-form, got bidegree {}",
            u.bidegree()
        )));
    }
    let n = u.n();
    Ok(DMatrix::from_fn(n, n, |j, k| {
        u.coeff(&MultiIndex::from_masks(1 << j, 1 << k)) * (-I)
    }))
}

/// Matrix over canonical bases with entries `f(row mask pair, col mask pair)` from
/// single-factor minors: `entry((A,B),(I,J)) = f(I,A) · conj(f(J,B))`.
fn compound<F>(n: usize, b: Bidegree, f: F) -> DMatrix<Complex>
where
    F: Fn(u32, u32) -> Complex,
{
    let holo = subsets(n, b.p);
    let anti = subsets(n, b.q);
    let hm = DMatrix::from_fn(holo.len(), holo.len(), |a, i| f(holo[i], holo[a]));
    let am = DMatrix::from_fn(anti.len(), anti.len(), |bb, j| f(anti[j], anti[bb]).conj());
    hm.kronecker(&am)
}

/// Star in a unitary coframe: `θ^K∧θ̄^L ↦ c θ^{L^c}∧θ̄^{K^c}` with the sign fixed by
/// `conj(w) ∧ ⋆w = dV`.
fn star_in_frame(n: usize, b: Bidegree) -> DMatrix<Complex> {
    let target = Bidegree::new(n - b.q, n - b.p);
    let full = (1u32 << n) - 1;
    let src = basis(n, b);
    let mut m = DMatrix::from_element(target.dim(n), src.len(), ZERO);
    let dv = crate::algebra::volume_normalization(n);
    for (col, mi) in src.iter().enumerate() {
        let (k, l) = (mi.holo_mask(), mi.anti_mask());
        let image = MultiIndex::from_masks(full & !l, full & !k);
        let conj_w = MultiIndex::from_masks(l, k).combined(n);
        let s = merge_sign(conj_w, image.combined(n)).expect("complementary supports");
        let kl = (k.count_ones() * l.count_ones()) % 2;
        let sign = if kl == 0 { 1.0 } else { -1.0 };
        let row = crate::algebra::basis_position(n, &image);
        m[(row, col)] = dv * (sign * s);
    }
    m
}

/// Re-express `op` with codomain `target`, which must contain every nonzero block.
pub fn embed(op: &BigradedOperator, target: &FormSpace) -> BigradedOperator {
    let mut matrix = DMatrix::from_element(target.dim(), op.domain.dim(), ZERO);
    let n = target.n();
    let mut off = 0;
    for &b in op.codomain.parts() {
        let d = b.dim(n);
        match target.offset(b) {
            Some(t) => matrix
                .view_mut((t, 0), (d, op.domain.dim()))
                .copy_from(&op.matrix.view((off, 0), (d, op.domain.dim()))),
            None => debug_assert!(
                op.matrix.view((off, 0), (d, op.domain.dim())).iter().all(|c| *c == ZERO),
                "dropping a nonzero block"
            ),
        }
        off += d;
    }
    BigradedOperator {
        domain: op.domain.clone(),
        codomain: target.clone(),
        matrix,
    }
}

/// Orthonormal basis of the kernel of a self-adjoint operator.
#[derive(Clone, Debug)]
pub struct HarmonicSpace {
    pub space: FormSpace,
    /// Columns are canonical coordinates of `L²`-orthonormal harmonic forms.
    pub basis: DMatrix<Complex>,
}

impl HarmonicSpace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn forms(&self) -> Vec<Form> {
        (0..self.dim())
            .map(|j| self.space.form(&self.basis.column(j).into_owned()))
            .collect()
    }

    /// Coordinates `x_j = ⟨⟨u, h_j⟩⟩`.
    pub fn project(&self, metric: &HermitianMetric, u: &Form) -> Result<DVector<Complex>> {
        let g = metric.gram(&self.space);
        let v = self.space.coords(u)?;
        Ok(self.basis.adjoint() * g * v)
    }

    pub fn combine(&self, coords: &DVector<Complex>) -> Form {
        self.space.form(&(&self.basis * coords))
    }
}

/// Differential operators and Laplacians of a model with respect to a metric.
#[derive(Clone, Copy, Debug)]
pub struct Hodge<'a> {
    pub model: &'a LieModel,
    pub metric: &'a HermitianMetric,
    pub tol: Tolerances,
}

/// One summand of the three-space decomposition of `Λ^{p,q}`.
#[derive(Clone, Debug, Serialize)]
pub struct DecompositionReport {
    pub theory: &'static str,
    pub bidegree: Bidegree,
    pub total_dim: usize,
    /// Dimensions of the harmonic summand and the two image summands.
    pub dims: [usize; 3],
    /// Largest pairwise inner product between orthonormal bases of the summands.
    pub orthogonality_residual: f64,
    /// `ker ∂ ∩ ker ∂̄` (BC) or `ker ∂∂̄` (A).
    pub closed_dim: usize,
    /// Residual of applying the closedness operators to the first two summands.
    pub closed_containment_residual: f64,
    pub laplacian_rank: usize,
    /// Distance of `Im Δ` from the sum of the two image summands.
    pub image_residual: f64,
}

impl DecompositionReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.dims.iter().sum::<usize>() == self.total_dim
            && self.orthogonality_residual < tol
            && self.closed_dim == self.dims[0] + self.dims[1]
            && self.closed_containment_residual < tol
            && self.laplacian_rank == self.dims[1] + self.dims[2]
            && self.image_residual < tol
    }
}

impl<'a> Hodge<'a> {
    pub fn new(model: &'a LieModel, metric: &'a HermitianMetric) -> Result<Self> {
        if model.n() != metric.n() {
            return Err(Error::Dimension(format!(
                "metric dimension {} does not match model dimension {}",
                metric.n(),
                model.n()
            )));
        }
        Ok(Hodge {
            model,
            metric,
            tol: Tolerances::default(),
        })
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    pub fn n(&self) -> usize {
        self.model.n()
    }

    fn at(&self, p: isize, q: isize) -> FormSpace {
        FormSpace::at(self.n(), p, q)
    }

    /// Differential component from `Λ^{p,q}` (possibly the zero space).
    pub fn op(&self, kind: OperatorKind, p: isize, q: isize) -> BigradedOperator {
        let (dp, dq) = match kind {
            OperatorKind::Del => (1, 0),
            OperatorKind::Delbar => (0, 1),
            OperatorKind::DelDelbar => (1, 1),
            OperatorKind::D => panic!("use Hodge::d for the total differential"),
        };
        let domain = self.at(p, q);
        let codomain = self.at(p + dp, q + dq);
        if domain.dim() == 0 || codomain.dim() == 0 {
            return BigradedOperator::zero(domain, codomain);
        }
        embed(&self.model.operator(kind, &domain), &codomain)
    }

    /// `d` from the degree-`k` forms to the degree-`(k+1)` forms.
    pub fn d(&self, k: isize) -> BigradedOperator {
        let n = self.n();
        let domain = if k < 0 { FormSpace::empty(n) } else { FormSpace::degree(n, k as usize) };
        let codomain = FormSpace::degree(n, (k + 1).max(0) as usize);
        if domain.dim() == 0 || codomain.dim() == 0 {
            return BigradedOperator::zero(domain, codomain);
        }
        embed(&self.model.operator(OperatorKind::D, &domain), &codomain)
    }

    pub fn adjoint(&self, a: &BigradedOperator) -> BigradedOperator {
        self.metric.adjoint(a)
    }

    /// `∂*` from `Λ^{p,q}` to `Λ^{p−1,q}`.
    pub fn del_star(&self, p: isize, q: isize) -> BigradedOperator {
        self.adjoint(&self.op(OperatorKind::Del, p - 1, q))
    }

    /// `∂̄*` from `Λ^{p,q}` to `Λ^{p,q−1}`.
    pub fn delbar_star(&self, p: isize, q: isize) -> BigradedOperator {
        self.adjoint(&self.op(OperatorKind::Delbar, p, q - 1))
    }

    /// `Δ_BC = ∂*∂ + ∂̄*∂̄ + (∂∂̄)*(∂∂̄) + (∂∂̄)(∂∂̄)* + (∂*∂̄)*(∂*∂̄) + (∂*∂̄)(∂*∂̄)*`.
    pub fn laplacian_bc(&self, b: Bidegree) -> BigradedOperator {
        let (p, q) = (b.p as isize, b.q as isize);
        let del = self.op(OperatorKind::Del, p, q);
        let delbar = self.op(OperatorKind::Delbar, p, q);
        let dd = self.op(OperatorKind::DelDelbar, p, q);
        let dd_in = self.op(OperatorKind::DelDelbar, p - 1, q - 1);
        // ∂*∂̄ : (p,q) → (p,q+1) → (p−1,q+1)
        let mixed = delbar.then(&self.del_star(p, q + 1));
        // ∂*∂̄ : (p+1,q−1) → (p+1,q) → (p,q)
        let mixed_in = self
            .op(OperatorKind::Delbar, p + 1, q - 1)
            .then(&self.del_star(p + 1, q));
        self.sum_of_squares(&[&del, &delbar, &dd, &mixed], &[&dd_in, &mixed_in])
    }

    /// `Δ_A = ∂∂* + ∂̄∂̄* + (∂∂̄)*(∂∂̄) + (∂∂̄)(∂∂̄)* + (∂∂̄*)(∂∂̄*)* + (∂∂̄*)*(∂∂̄*)`.
    pub fn laplacian_a(&self, b: Bidegree) -> BigradedOperator {
        let (p, q) = (b.p as isize, b.q as isize);
        let del_in = self.op(OperatorKind::Del, p - 1, q);
        let delbar_in = self.op(OperatorKind::Delbar, p, q - 1);
        let dd = self.op(OperatorKind::DelDelbar, p, q);
        let dd_in = self.op(OperatorKind::DelDelbar, p - 1, q - 1);
        // ∂∂̄* : (p,q) → (p,q−1) → (p+1,q−1)
        let mixed = self
            .delbar_star(p, q)
            .then(&self.op(OperatorKind::Del, p, q - 1));
        // ∂∂̄* : (p−1,q+1) → (p−1,q) → (p,q)
        let mixed_in = self
            .delbar_star(p - 1, q + 1)
            .then(&self.op(OperatorKind::Del, p - 1, q));
        self.sum_of_squares(&[&dd, &mixed], &[&del_in, &delbar_in, &dd_in, &mixed_in])
    }

    /// `Δ_∂̄ = ∂̄∂̄* + ∂̄*∂̄`.
    pub fn laplacian_delbar(&self, b: Bidegree) -> BigradedOperator {
        let (p, q) = (b.p as isize, b.q as isize);
        let out = self.op(OperatorKind::Delbar, p, q);
        let inc = self.op(OperatorKind::Delbar, p, q - 1);
        self.sum_of_squares(&[&out], &[&inc])
    }

    /// `Δ = dd* + d*d` on degree-`k` forms.
    pub fn laplacian_derham(&self, k: usize) -> BigradedOperator {
        let out = self.d(k as isize);
        let inc = self.d(k as isize - 1);
        self.sum_of_squares(&[&out], &[&inc])
    }

    /// `Σ A*A` over `outgoing` plus `Σ B B*` over `incoming`, all on one space.
    fn sum_of_squares(
        &self,
        outgoing: &[&BigradedOperator],
        incoming: &[&BigradedOperator],
    ) -> BigradedOperator {
        let space = outgoing
            .first()
            .map(|a| a.domain.clone())
            .or_else(|| incoming.first().map(|b| b.codomain.clone()))
            .expect("at least one term");
        let mut acc = BigradedOperator::zero(space.clone(), space.clone());
        for a in outgoing {
            debug_assert_eq!(a.domain, space);
            acc = acc.add(&a.then(&self.adjoint(a)));
        }
        for b in incoming {
            debug_assert_eq!(b.codomain, space);
            acc = acc.add(&self.adjoint(b).then(b));
        }
        acc
    }

    /// Orthonormal basis of the kernel of a Gram-self-adjoint, positive semidefinite operator.
    pub fn harmonic_space(&self, a: &BigradedOperator) -> HarmonicSpace {
        let space = a.domain.clone();
        let whitened = self.metric.whitened(a);
        let (values, vectors) = hermitian_eigen(&whitened);
        let lmax = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tau = linalg::threshold(lmax, space.dim(), space.dim(), self.tol.rank);
        let cols: Vec<usize> = (0..values.len())
            .filter(|&i| lmax == 0.0 || values[i] <= tau)
            .collect();
        let kernel = DMatrix::from_fn(space.dim(), cols.len(), |r, c| vectors[(r, cols[c])]);
        HarmonicSpace {
            basis: self.metric.unwhitening(&space) * kernel,
            space,
        }
    }

    /// Whitened orthonormal basis of the range of `a` (restricted to its codomain).
    fn whitened_range(&self, blocks: &[&BigradedOperator], space: &FormSpace) -> DMatrix<Complex> {
        let mats: Vec<DMatrix<Complex>> = blocks.iter().map(|a| self.metric.whitened(a)).collect();
        let refs: Vec<&DMatrix<Complex>> = mats.iter().collect();
        if refs.is_empty() {
            return DMatrix::from_element(space.dim(), 0, ZERO);
        }
        range_space(&linalg::hstack(&refs), self.tol.rank)
    }

    /// Three-space decomposition checks for the Bott-Chern Laplacian.
    pub fn decomposition_bc(&self, b: Bidegree) -> DecompositionReport {
        let (p, q) = (b.p as isize, b.q as isize);
        let space = self.at(p, q);
        let lap = self.laplacian_bc(b);
        let harm = self.harmonic_space(&lap);
        let w = self.metric.whitening(&space);
        let k = &w * &harm.basis;
        let r1 = self.whitened_range(&[&self.op(OperatorKind::DelDelbar, p - 1, q - 1)], &space);
        let r2 = self.whitened_range(&[&self.del_star(p + 1, q), &self.delbar_star(p, q + 1)], &space);
        let closed = linalg::vstack(&[
            &self.op(OperatorKind::Del, p, q).matrix,
            &self.op(OperatorKind::Delbar, p, q).matrix,
        ]);
        self.report("BC", b, &space, &lap, &k, &r1, &r2, &closed)
    }

    /// Three-space decomposition checks for the Aeppli Laplacian.
    pub fn decomposition_a(&self, b: Bidegree) -> DecompositionReport {
        let (p, q) = (b.p as isize, b.q as isize);
        let space = self.at(p, q);
        let lap = self.laplacian_a(b);
        let harm = self.harmonic_space(&lap);
        let w = self.metric.whitening(&space);
        let k = &w * &harm.basis;
        let dd_star = self.adjoint(&self.op(OperatorKind::DelDelbar, p, q));
        let r1 = self.whitened_range(&[&dd_star], &space);
        let r2 = self.whitened_range(
            &[
                &self.op(OperatorKind::Del, p - 1, q),
                &self.op(OperatorKind::Delbar, p, q - 1),
            ],
            &space,
        );
        let closed = self.op(OperatorKind::DelDelbar, p, q).matrix;
        let report = self.report("A", b, &space, &lap, &k, &r1, &r2, &closed);
        // In the Aeppli case the closed subspace is ker Δ_A ⊕ (Im ∂ + Im ∂̄): the first
        // and third summands, so reorder the dims to keep `holds` uniform.
        DecompositionReport {
            dims: [report.dims[0], report.dims[2], report.dims[1]],
            ..report
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn report(
        &self,
        theory: &'static str,
        b: Bidegree,
        space: &FormSpace,
        lap: &BigradedOperator,
        k: &DMatrix<Complex>,
        r1: &DMatrix<Complex>,
        r2: &DMatrix<Complex>,
        closed: &DMatrix<Complex>,
    ) -> DecompositionReport {
        let cross = |a: &DMatrix<Complex>, c: &DMatrix<Complex>| linalg::max_abs(&(a.adjoint() * c));
        let orthogonality_residual = cross(k, r1).max(cross(k, r2)).max(cross(r1, r2));
        let closed_dim = linalg::null_space(closed, self.tol.rank).ncols();
        let unw = self.metric.unwhitening(space);
        // Containment of the harmonic part and of the first image summand in the closed space
        // (for A the closed space holds the second image summand instead).
        let inside = if theory == "BC" { r1 } else { r2 };
        let cscale = closed.norm().max(1.0);
        let closed_containment_residual = linalg::max_abs(&(closed * &unw * k))
            .max(linalg::max_abs(&(closed * &unw * inside)))
            / cscale;
        let lap_w = self.metric.whitened(lap);
        let lap_range = range_space(&lap_w, self.tol.rank);
        let sum = linalg::hstack(&[r1, r2]);
        let image_residual = if lap_range.ncols() == 0 {
            0.0
        } else {
            let proj = &sum * (sum.adjoint() * &lap_range);
            linalg::max_abs(&(&lap_range - proj))
        };
        DecompositionReport {
            theory,
            bidegree: b,
            total_dim: space.dim(),
            dims: [k.ncols(), r1.ncols(), r2.ncols()],
            orthogonality_residual,
            closed_dim,
            closed_containment_residual,
            laplacian_rank: lap_range.ncols(),
            image_residual,
        }
    }

    /// Singular values of `L^k` on degree-`p` forms, optionally restricted to
    /// `Δ`-harmonic forms (Kähler metrics only). Returns `(σ_min, σ_max)`.
    pub fn quasi_isometry_bounds(&self, k: usize, p: usize, harmonic: bool) -> Result<(f64, f64)> {
        let n = self.n();
        if k == 0 {
            return Ok((1.0, 1.0));
        }
        let source = FormSpace::degree(n, p);
        let op = self.metric.lefschetz(k, &source);
        let target = FormSpace::degree(n, p + 2 * k);
        let op = embed(&op, &target);
        let mut m = self.metric.whitened(&op);
        if harmonic {
            self.require_kahler()?;
            let harm = self.harmonic_space(&self.laplacian_derham(p));
            let h = self.metric.whitening(&source) * harm.basis;
            m *= h;
        }
        let cols = m.ncols();
        if cols == 0 {
            return Ok((0.0, 0.0));
        }
        let s = linalg::singular_values(&m);
        let smax = s.first().copied().unwrap_or(0.0);
        let smin = if m.nrows() < cols { 0.0 } else { s.last().copied().unwrap_or(0.0) };
        Ok((smin, smax))
    }

    /// `(rank of L^k on harmonic p-forms, dim harmonic p-forms, dim harmonic (p+2k)-forms)`.
    pub fn lefschetz_harmonic_ranks(&self, k: usize, p: usize) -> Result<(usize, usize, usize)> {
        self.require_kahler()?;
        let n = self.n();
        let source = FormSpace::degree(n, p);
        let target = FormSpace::degree(n, p + 2 * k);
        let harm_src = self.harmonic_space(&self.laplacian_derham(p));
        let harm_tgt = if target.dim() == 0 {
            0
        } else {
            self.harmonic_space(&self.laplacian_derham(p + 2 * k)).dim()
        };
        if target.dim() == 0 || harm_src.dim() == 0 {
            return Ok((0, harm_src.dim(), harm_tgt));
        }
        let op = embed(&self.metric.lefschetz(k, &source), &target);
        let m = self.metric.whitened(&op) * (self.metric.whitening(&source) * harm_src.basis);
        Ok((linalg::rank(&m, self.tol.rank), m.ncols(), harm_tgt))
    }

    /// `‖dω‖ / ‖ω‖`.
    pub fn kahler_residual(&self) -> f64 {
        let omega = self.metric.omega();
        let (a, b) = self.model.differential(omega);
        (a.coeff_norm().powi(2) + b.coeff_norm().powi(2)).sqrt() / omega.coeff_norm()
    }

    fn require_kahler(&self) -> Result<()> {
        let r = self.kahler_residual();
        if r > self.tol.eq {
            return Err(Error::Precondition(format!(
                "harmonic restriction requires a Kähler metric (‖dω‖/‖ω‖ = {r:.3e})"
            )));
        }
        Ok(())
    }

    /// `‖⋆v − (−1)^{k(k+1)/2} i^{p−q} ω_{n−p−q} ∧ v‖ / ‖v‖` for primitive `v`.
    pub fn primitive_star_check(&self, v: &Form) -> Result<f64> {
        let n = self.n();
        let b = v.bidegree();
        let k = b.degree();
        let norm = self.metric.norm(v);
        if norm == 0.0 {
            return Ok(0.0);
        }
        let prim = self.metric.primitivity_residual(v);
        if prim > self.tol.eq.max(1e-9) || k > n {
            return Err(Error::Precondition(format!(
                "form is not primitive (‖Λ_ω v‖/‖v‖ = {prim:.3e})"
            )));
        }
        let sign = if (k * (k + 1) / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
        let phase = I.powi(b.p as i32 - b.q as i32) * sign;
        let rhs = self.metric.omega_power(n - k).wedge(v).scale(phase);
        let lhs = self.metric.star_form(v);
        Ok(self.metric.norm(&lhs.sub(&rhs)) / norm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn metric_validation() {
        let m = fixtures::torus(2);
        let id = HermitianMetric::for_model(&m, "id", DMatrix::identity(2, 2)).unwrap();
        let expected = Form::term(2, &[1], &[1], I)
            .unwrap()
            .add(&Form::term(2, &[2], &[2], I).unwrap());
        assert_eq!(id.omega(), &expected);
        let d21 = DMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), ZERO, ZERO, ONE]);
        let g = HermitianMetric::for_model(&m, "d", d21).unwrap();
        let expected = Form::term(2, &[1], &[1], c(0.0, 2.0))
            .unwrap()
            .add(&Form::term(2, &[2], &[2], I).unwrap());
        assert_eq!(g.omega(), &expected);
        let bad = DMatrix::from_row_slice(2, 2, &[ONE, c(2.0, 0.0), c(2.0, 0.0), ONE]);
        let err = HermitianMetric::for_model(&m, "bad", bad).unwrap_err();
        assert!(err.to_string().contains("not positive definite"));
        let nonherm = DMatrix::from_row_slice(2, 2, &[ONE, c(0.0, 1.0), c(0.0, 1.0), ONE]);
        assert!(HermitianMetric::new("x", nonherm).is_err());
        let wrong_dim = DMatrix::identity(3, 3);
        assert!(HermitianMetric::for_model(&m, "x", wrong_dim).is_err());
    }

    #[test]
    fn omega_is_real() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=4 {
            let g = HermitianMetric::random(n, &mut rng);
            assert!(g.omega().reality_residual() < 1e-14);
        }
    }

    #[test]
    fn star_on_unit_forms() {
        let g1 = HermitianMetric::identity(1);
        let phi = Form::term(1, &[1], &[], ONE).unwrap();
        assert_eq!(g1.star_form(&phi), phi.scale(-I));
        for n in 1..=3 {
            let g = HermitianMetric::identity(n);
            let one = Form::scalar(n, ONE);
            assert!(g.star_form(&one).sub(&g.volume_form()).coeff_norm() < 1e-14);
            assert!(g.star_form(&g.volume_form()).sub(&one).coeff_norm() < 1e-14);
        }
        let g2 = HermitianMetric::identity(2);
        let omega = g2.omega().clone();
        assert!(g2.star_form(&omega).sub(&omega).coeff_norm() < 1e-14);
    }

    #[test]
    fn star_squares_to_sign_and_is_real() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=3 {
            let g = HermitianMetric::random(n, &mut rng);
            for k in 0..=2 * n {
                let s = FormSpace::degree(n, k);
                let star = g.star(&s);
                let back = g.star(&star.codomain);
                let sq = star.then(&back);
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let resid = (&sq.matrix - DMatrix::<Complex>::identity(s.dim(), s.dim()) * c(sign, 0.0)).norm();
                assert!(resid < 1e-10, "n={n} k={k} resid={resid}");
            }
            // ⋆ commutes with conjugation
            let b = Bidegree::new(1, 0);
            let u = Form::from_vector(n, b, &vec![c(0.3, -1.2); b.dim(n)]);
            let lhs = g.star_form(&u.conjugate());
            let rhs = g.star_form(&u).conjugate();
            assert!(lhs.sub(&rhs).coeff_norm() < 1e-12);
        }
    }

    #[test]
    fn inner_product_matches_star_pairing() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=3 {
            let g = HermitianMetric::random(n, &mut rng);
            for p in 0..=n {
                for q in 0..=n {
                    let b = Bidegree::new(p, q);
                    let mk = |rng: &mut ChaCha8Rng| {
                        let v: Vec<Complex> = (0..b.dim(n))
                            .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                            .collect();
                        Form::from_vector(n, b, &v)
                    };
                    let u = mk(&mut rng);
                    let v = mk(&mut rng);
                    let lhs = g.inner(&u, &v);
                    let rhs = u.wedge(&g.star_form(&v.conjugate())).integral();
                    assert!((lhs - rhs).norm() < 1e-9 * (1.0 + lhs.norm()), "n={n} b={b}");
                }
            }
        }
    }

    #[test]
    fn lambda_of_omega_is_n() {
        for n in 1..=3 {
            let g = HermitianMetric::identity(n);
            let lw = g.lambda_form(g.omega());
            assert!(lw.sub(&Form::scalar(n, c(n as f64, 0.0))).coeff_norm() < 1e-12);
            assert!(g.lambda_form(&Form::scalar(n, ONE)).is_empty());
        }
        let g3 = HermitianMetric::identity(3);
        let phi = Form::term(3, &[1], &[], ONE).unwrap();
        assert!(g3.primitivity_residual(&phi) < 1e-14);
        assert!(g3.primitivity_residual_by_wedge(&phi) < 1e-14);
    }

    #[test]
    fn primitive_star_examples() {
        let m = fixtures::torus(2);
        let g = HermitianMetric::identity(2);
        let h = Hodge::new(&m, &g).unwrap();
        for v in [
            Form::term(2, &[1], &[], ONE).unwrap(),
            Form::term(2, &[], &[2], c(0.5, -2.0)).unwrap(),
            Form::term(2, &[1], &[2], ONE).unwrap(),
        ] {
            assert!(h.primitive_star_check(&v).unwrap() < 1e-12);
        }
        assert!(matches!(
            h.primitive_star_check(g.omega()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn adjoint_is_involutive() {
        let m = fixtures::iwasawa();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = HermitianMetric::random(3, &mut rng);
        let h = Hodge::new(&m, &g).unwrap();
        let a = h.op(OperatorKind::Del, 1, 1);
        let back = g.adjoint(&g.adjoint(&a));
        assert!((back.matrix - a.matrix).norm() < 1e-10);
        let t = fixtures::torus(2);
        let g2 = HermitianMetric::identity(2);
        let h2 = Hodge::new(&t, &g2).unwrap();
        assert_eq!(h2.del_star(1, 1).norm(), 0.0);
    }

    #[test]
    fn torus_laplacians_vanish() {
        let m = fixtures::torus(2);
        let g = HermitianMetric::identity(2);
        let h = Hodge::new(&m, &g).unwrap();
        for p in 0..=2 {
            for q in 0..=2 {
                let b = Bidegree::new(p, q);
                assert_eq!(h.laplacian_bc(b).norm(), 0.0);
                assert_eq!(h.laplacian_a(b).norm(), 0.0);
                assert_eq!(h.harmonic_space(&h.laplacian_bc(b)).dim(), b.dim(2));
            }
        }
        assert_eq!(h.harmonic_space(&h.laplacian_derham(1)).dim(), 4);
    }

    #[test]
    fn iwasawa_bc_10_kernel() {
        let m = fixtures::iwasawa();
        let g = HermitianMetric::identity(3);
        let h = Hodge::new(&m, &g).unwrap();
        let lap = h.laplacian_bc(Bidegree::new(1, 0));
        assert_eq!(h.harmonic_space(&lap).dim(), 2);
    }

    #[test]
    fn kt_omega_harmonic_part() {
        // ∂φ̄² = −φ¹∧φ̄¹ lies in Im ∂, so ω is not Δ_A-harmonic; its harmonic part is iφ²∧φ̄².
        let m = fixtures::kodaira_thurston();
        let g = HermitianMetric::identity(2);
        let h = Hodge::new(&m, &g).unwrap();
        let lap = h.laplacian_a(Bidegree::new(1, 1));
        assert!(lap.apply_single(g.omega()).unwrap().coeff_norm() > 0.1);
        let harm = h.harmonic_space(&lap);
        let part = harm.combine(&harm.project(&g, g.omega()).unwrap());
        let expected = Form::term(2, &[2], &[2], I).unwrap();
        assert!(part.sub(&expected).coeff_norm() < 1e-12);
        assert!(lap.apply_single(&part).unwrap().coeff_norm() < 1e-12);
    }

    #[test]
    fn quasi_isometry_examples() {
        let m = fixtures::torus(2);
        let g = HermitianMetric::identity(2);
        let h = Hodge::new(&m, &g).unwrap();
        assert_eq!(h.quasi_isometry_bounds(0, 1, true).unwrap(), (1.0, 1.0));
        let (smin, _) = h.quasi_isometry_bounds(1, 1, true).unwrap();
        assert!(smin > 0.1);
        assert_eq!(h.quasi_isometry_bounds(2, 1, true).unwrap(), (0.0, 0.0));
        let kt = fixtures::kodaira_thurston();
        let hk = Hodge::new(&kt, &g).unwrap();
        assert!(hk.quasi_isometry_bounds(1, 1, true).is_err());
        assert!(hk.quasi_isometry_bounds(1, 1, false).is_ok());
    }

    #[test]
    fn primitive_part_is_a_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let g = HermitianMetric::random(3, &mut rng);
        let b = Bidegree::new(1, 1);
        let v: Vec<Complex> = (0..b.dim(3)).map(|k| c(k as f64 - 4.0, 0.5 * k as f64)).collect();
        let u = Form::from_vector(3, b, &v);
        let p = g.primitive_part(&u);
        assert!(g.primitivity_residual(&p) < 1e-12);
        assert!(g.primitive_part(&p).sub(&p).coeff_norm() < 1e-12);
        // u − p lies in Im L, hence is orthogonal to p.
        assert!(g.inner(&u.sub(&p), &p).norm() < 1e-10);
        let one_form = Form::term(3, &[2], &[], ONE).unwrap();
        assert_eq!(g.primitive_part(&one_form), one_form);
    }
}
