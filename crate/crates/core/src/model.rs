//! Lie-algebra models: complex structure equations, the differential and its
//! `(1,0)`/`(0,1)` components, and operator matrices over canonical bases.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    basis, basis_position, merge_sign, Bidegree, Complex, Form, FormSpace, MultiIndex, ZERO,
};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TermKind {
    /// `φ^i ∧ φ^j` with `i < j`
    #[serde(rename = "20")]
    Holomorphic,
    /// `φ^i ∧ φ̄^j`
    #[serde(rename = "11")]
    Mixed,
}

/// One summand `coeff · φ^i∧φ^j` or `coeff · φ^i∧φ̄^j` of some `dφ^k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StructureTerm {
    pub kind: TermKind,
    pub i: usize,
    pub j: usize,
    pub coeff: Complex,
}

#[derive(Serialize, Deserialize)]
struct TermDoc {
    #[serde(rename = "type")]
    kind: TermKind,
    i: usize,
    j: usize,
    coeff: [f64; 2],
}

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    name: String,
    n: usize,
    dphi: Vec<Vec<TermDoc>>,
}

/// Which component of the differential to assemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    D,
    Del,
    Delbar,
    /// `∂∘∂̄`
    DelDelbar,
}

/// Image of one generator under a component of `d`, as (combined mask, coefficient) pairs.
type GeneratorImage = Vec<(u64, Complex)>;

/// Left-invariant model of a compact complex manifold: the structure equations
/// `dφ^k = Σ a^k_{ij} φ^i∧φ^j + Σ b^k_{ij} φ^i∧φ̄^j`.
#[derive(Clone, Debug)]
pub struct LieModel {
    name: String,
    n: usize,
    dphi: Vec<Vec<StructureTerm>>,
    gen_del: Vec<GeneratorImage>,
    gen_delbar: Vec<GeneratorImage>,
}

impl PartialEq for LieModel {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.n == other.n && self.dphi == other.dphi
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub d_squared_zero: bool,
    pub integrable: bool,
    pub unimodular: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.d_squared_zero && self.integrable
    }
}

impl LieModel {
    pub fn new(name: impl Into<String>, n: usize, dphi: Vec<Vec<StructureTerm>>) -> Result<Self> {
        if n == 0 || n > crate::algebra::MAX_DIM {
            return Err(Error::parse("n", format!("dimension {n} outside 1..=16")));
        }
        if dphi.len() != n {
            return Err(Error::parse(
                "dphi",
                format!("expected {n} structure equations, found {}", dphi.len()),
            ));
        }
        for (k, eq) in dphi.iter().enumerate() {
            for (t, term) in eq.iter().enumerate() {
                let path = format!("dphi[{k}][{t}]");
                for (label, idx) in [("i", term.i), ("j", term.j)] {
                    if idx == 0 || idx > n {
                        return Err(Error::parse(
                            format!("{path}.{label}"),
                            format!("index {idx} outside 1..={n}"),
                        ));
                    }
                }
                if term.kind == TermKind::Holomorphic && term.i >= term.j {
                    return Err(Error::parse(
                        format!("{path}.j"),
                        "a (2,0) term needs i < j",
                    ));
                }
                if !term.coeff.re.is_finite() || !term.coeff.im.is_finite() {
                    return Err(Error::parse(format!("{path}.coeff"), "non-finite coefficient"));
                }
            }
        }
        let (gen_del, gen_delbar) = generator_images(n, &dphi);
        Ok(LieModel {
            name: name.into(),
            n,
            dphi,
            gen_del,
            gen_delbar,
        })
    }

    /// Parse the JSON model document, reporting the offending path on failure.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let doc: ModelDoc = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::parse(path, e.into_inner().to_string())
        })?;
        let dphi = doc
            .dphi
            .into_iter()
            .map(|eq| {
                eq.into_iter()
                    .map(|t| StructureTerm {
                        kind: t.kind,
                        i: t.i,
                        j: t.j,
                        coeff: Complex::new(t.coeff[0], t.coeff[1]),
                    })
                    .collect()
            })
            .collect();
        LieModel::new(doc.name, doc.n, dphi)
    }

    pub fn to_json(&self) -> String {
        let doc = ModelDoc {
            name: self.name.clone(),
            n: self.n,
            dphi: self
                .dphi
                .iter()
                .map(|eq| {
                    eq.iter()
                        .map(|t| TermDoc {
                            kind: t.kind,
                            i: t.i,
                            j: t.j,
                            coeff: [t.coeff.re, t.coeff.im],
                        })
                        .collect()
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("model document serializes")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn structure(&self) -> &[Vec<StructureTerm>] {
        &self.dphi
    }

    /// `φ^k` (1-based).
    pub fn phi(&self, k: usize) -> Form {
        Form::term(self.n, &[k], &[], crate::algebra::ONE).expect("generator index in range")
    }

    /// `φ̄^k` (1-based).
    pub fn phibar(&self, k: usize) -> Form {
        Form::term(self.n, &[], &[k], crate::algebra::ONE).expect("generator index in range")
    }

    fn apply(&self, u: &Form, images: &[GeneratorImage], target: Bidegree) -> Form {
        let n = self.n;
        let mut out = Form::zero(n, target);
        if target.p > n || target.q > n {
            return out;
        }
        for (mi, &c) in u.terms() {
            let m = mi.combined(n);
            let mut position = 0usize;
            let mut rest = m;
            while rest != 0 {
                let g = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let sign = if position.is_multiple_of(2) { 1.0 } else { -1.0 };
                position += 1;
                let prefix = m & ((1u64 << g) - 1);
                let suffix = m & !((1u64 << (g + 1)) - 1);
                for &(t, tc) in &images[g] {
                    let Some(s1) = merge_sign(prefix, t) else { continue };
                    let Some(s2) = merge_sign(prefix | t, suffix) else { continue };
                    out.add_term(
                        MultiIndex::from_combined(n, prefix | t | suffix),
                        c * tc * (sign * s1 * s2),
                    );
                }
            }
        }
        out
    }

    /// `∂u`, of bidegree `(p+1, q)`.
    pub fn del(&self, u: &Form) -> Form {
        let b = u.bidegree();
        self.apply(u, &self.gen_del, Bidegree::new(b.p + 1, b.q))
    }

    /// `∂̄u`, of bidegree `(p, q+1)`.
    pub fn delbar(&self, u: &Form) -> Form {
        let b = u.bidegree();
        self.apply(u, &self.gen_delbar, Bidegree::new(b.p, b.q + 1))
    }

    /// `du = ∂u + ∂̄u`, returned as its two components.
    pub fn differential(&self, u: &Form) -> (Form, Form) {
        (self.del(u), self.delbar(u))
    }

    pub fn deldelbar(&self, u: &Form) -> Form {
        self.del(&self.delbar(u))
    }

    /// Matrix of a differential component on `domain`; columns are images of basis forms.
    pub fn operator(&self, kind: OperatorKind, domain: &FormSpace) -> BigradedOperator {
        let n = self.n;
        let codomain = match kind {
            OperatorKind::D => domain.shifted(1, 0).union(&domain.shifted(0, 1)),
            OperatorKind::Del => domain.shifted(1, 0),
            OperatorKind::Delbar => domain.shifted(0, 1),
            OperatorKind::DelDelbar => domain.shifted(1, 1),
        };
        let mut matrix = DMatrix::from_element(codomain.dim(), domain.dim(), ZERO);
        let mut col = 0;
        for &b in domain.parts() {
            for mi in basis(n, b) {
                let e = Form::monomial(n, mi, crate::algebra::ONE);
                let images = match kind {
                    OperatorKind::D => vec![self.del(&e), self.delbar(&e)],
                    OperatorKind::Del => vec![self.del(&e)],
                    OperatorKind::Delbar => vec![self.delbar(&e)],
                    OperatorKind::DelDelbar => vec![self.deldelbar(&e)],
                };
                for img in images {
                    if let Some(off) = codomain.offset(img.bidegree()) {
                        for (t, &c) in img.terms() {
                            matrix[(off + basis_position(n, t), col)] += c;
                        }
                    }
                }
                col += 1;
            }
        }
        BigradedOperator {
            domain: domain.clone(),
            codomain,
            matrix,
        }
    }

    /// Operator matrix on the single bidegree `b`.
    pub fn operator_matrix(&self, kind: OperatorKind, b: Bidegree) -> BigradedOperator {
        self.operator(kind, &FormSpace::single(self.n, b))
    }

    /// Check `d² = 0` on generators, integrability, and unimodularity.
    pub fn validate(&self) -> ValidationReport {
        let n = self.n;
        let scale = 1.0
            + self
                .dphi
                .iter()
                .flatten()
                .map(|t| t.coeff.norm())
                .fold(0.0, f64::max);
        let tol = 1e-12 * scale * scale;
        let mut d_squared_zero = true;
        for k in 1..=n {
            for g in [self.phi(k), self.phibar(k)] {
                let (a, b) = self.differential(&g);
                let dd = [self.del(&a), self.delbar(&a).add(&self.del(&b)), self.delbar(&b)];
                if dd.iter().any(|f| f.coeff_norm() > tol) {
                    d_squared_zero = false;
                }
            }
        }
        // Terms are typed (2,0) or (1,1), so no dφ^k can carry a (0,2) part;
        // re-check on the assembled images.
        let integrable = (0..n).all(|g| {
            self.gen_delbar[g]
                .iter()
                .all(|&(m, _)| MultiIndex::from_combined(n, m).bidegree() == Bidegree::new(1, 1))
        });
        ValidationReport {
            d_squared_zero,
            integrable,
            unimodular: self.is_unimodular(),
        }
    }

    /// Stokes on invariant forms: `d` of every `(2n−1)`-form has zero volume component.
    pub fn is_unimodular(&self) -> bool {
        let n = self.n;
        let op = self.operator(OperatorKind::D, &FormSpace::degree(n, 2 * n - 1));
        let scale = 1.0
            + self
                .dphi
                .iter()
                .flatten()
                .map(|t| t.coeff.norm())
                .fold(0.0, f64::max);
        op.matrix.iter().all(|c| c.norm() <= 1e-12 * scale)
    }
}

fn generator_images(
    n: usize,
    dphi: &[Vec<StructureTerm>],
) -> (Vec<GeneratorImage>, Vec<GeneratorImage>) {
    let holo = |i: usize| 1u64 << (i - 1);
    let anti = |i: usize| 1u64 << (n + i - 1);
    let mut del = vec![Vec::new(); 2 * n];
    let mut delbar = vec![Vec::new(); 2 * n];
    for (k, eq) in dphi.iter().enumerate() {
        for t in eq {
            match t.kind {
                TermKind::Holomorphic => {
                    // ∂φ^k ∋ a φ^i∧φ^j ; ∂̄φ̄^k ∋ ā φ̄^i∧φ̄^j
                    del[k].push((holo(t.i) | holo(t.j), t.coeff));
                    delbar[n + k].push((anti(t.i) | anti(t.j), t.coeff.conj()));
                }
                TermKind::Mixed => {
                    // ∂̄φ^k ∋ b φ^i∧φ̄^j ; ∂φ̄^k ∋ b̄ φ̄^i∧φ^j = −b̄ φ^j∧φ̄^i
                    delbar[k].push((holo(t.i) | anti(t.j), t.coeff));
                    del[n + k].push((holo(t.j) | anti(t.i), -t.coeff.conj()));
                }
            }
        }
    }
    let merge = |images: Vec<GeneratorImage>| {
        images
            .into_iter()
            .map(|img| {
                let mut acc: std::collections::BTreeMap<u64, Complex> = Default::default();
                for (m, c) in img {
                    *acc.entry(m).or_insert(ZERO) += c;
                }
                acc.into_iter().filter(|(_, c)| *c != ZERO).collect()
            })
            .collect()
    };
    (merge(del), merge(delbar))
}

/// A linear map between direct sums of bidegree components, as a dense matrix
/// over the canonical bases.
#[derive(Clone, Debug, PartialEq)]
pub struct BigradedOperator {
    pub domain: FormSpace,
    pub codomain: FormSpace,
    pub matrix: DMatrix<Complex>,
}

impl BigradedOperator {
    pub fn new(domain: FormSpace, codomain: FormSpace, matrix: DMatrix<Complex>) -> Result<Self> {
        if matrix.nrows() != codomain.dim() || matrix.ncols() != domain.dim() {
            return Err(Error::Dimension(format!(
                "{}x{} matrix for map {domain} -> {codomain}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(BigradedOperator {
            domain,
            codomain,
            matrix,
        })
    }

    pub fn zero(domain: FormSpace, codomain: FormSpace) -> Self {
        let matrix = DMatrix::from_element(codomain.dim(), domain.dim(), ZERO);
        BigradedOperator {
            domain,
            codomain,
            matrix,
        }
    }

    pub fn identity(space: FormSpace) -> Self {
        let d = space.dim();
        BigradedOperator {
            domain: space.clone(),
            codomain: space,
            matrix: DMatrix::identity(d, d),
        }
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &BigradedOperator) -> BigradedOperator {
        assert_eq!(
            self.codomain, other.domain,
            "composing {} -> {} with {} -> {}",
            self.domain, self.codomain, other.domain, other.codomain
        );
        BigradedOperator {
            domain: self.domain.clone(),
            codomain: other.codomain.clone(),
            matrix: &other.matrix * &self.matrix,
        }
    }

    pub fn add(&self, other: &BigradedOperator) -> BigradedOperator {
        assert_eq!(self.domain, other.domain);
        assert_eq!(self.codomain, other.codomain);
        BigradedOperator {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn scale(&self, c: Complex) -> BigradedOperator {
        BigradedOperator {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            matrix: &self.matrix * c,
        }
    }

    pub fn apply(&self, u: &Form) -> Result<Vec<Form>> {
        let v = &self.matrix * self.domain.coords(u)?;
        Ok(self.codomain.forms(&v))
    }

    /// Apply to a form and return the single-bidegree image.
    pub fn apply_single(&self, u: &Form) -> Result<Form> {
        let v = &self.matrix * self.domain.coords(u)?;
        if self.codomain.parts().is_empty() {
            let b = u.bidegree();
            return Ok(Form::zero(u.n(), b));
        }
        Ok(self.codomain.form(&v))
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ONE;
    use crate::fixtures;

    #[test]
    fn iwasawa_structure() {
        let m = fixtures::iwasawa();
        assert_eq!(m.del(&m.phi(3)), Form::term(3, &[1, 2], &[], -ONE).unwrap());
        assert!(m.delbar(&m.phi(3)).is_empty());
        assert_eq!(m.structure()[2][0].coeff, -ONE);
    }

    #[test]
    fn kodaira_thurston_structure() {
        let m = fixtures::kodaira_thurston();
        let b11 = Form::term(2, &[1], &[1], ONE).unwrap();
        assert_eq!(m.delbar(&m.phi(2)), b11);
        assert!(m.del(&m.phi(2)).is_empty());
        assert_eq!(m.del(&m.phibar(2)), b11.scale_real(-1.0));
    }

    #[test]
    fn torus_differential_vanishes() {
        let m = fixtures::torus(3);
        for k in 0..=6 {
            let op = m.operator(OperatorKind::D, &FormSpace::degree(3, k));
            assert_eq!(op.norm(), 0.0);
        }
    }

    #[test]
    fn iwasawa_del_rank_on_10() {
        let m = fixtures::iwasawa();
        let op = m.operator_matrix(OperatorKind::Del, Bidegree::new(1, 0));
        let rank = crate::linalg::rank(&op.matrix, None);
        assert_eq!(rank, 1);
    }

    #[test]
    fn deldelbar_is_composition() {
        for m in fixtures::all() {
            let n = m.n();
            for p in 0..=n {
                for q in 0..=n {
                    let b = Bidegree::new(p, q);
                    let dd = m.operator_matrix(OperatorKind::DelDelbar, b);
                    let db = m.operator_matrix(OperatorKind::Delbar, b);
                    let dl = m.operator(OperatorKind::Del, &db.codomain);
                    assert_eq!(dd.matrix, db.then(&dl).matrix);
                }
            }
        }
    }

    #[test]
    fn validation_of_fixtures() {
        let ok = ValidationReport {
            d_squared_zero: true,
            integrable: true,
            unimodular: true,
        };
        assert_eq!(fixtures::torus(3).validate(), ok);
        assert_eq!(fixtures::iwasawa().validate(), ok);
        assert_eq!(fixtures::kodaira_thurston().validate(), ok);
        let aff = fixtures::affine();
        assert_eq!(
            aff.validate(),
            ValidationReport {
                unimodular: false,
                ..ok
            }
        );
    }

    #[test]
    fn jacobi_failure_detected() {
        // dφ¹ = φ²∧φ̄², dφ² = φ¹∧φ̄¹ gives d²φ¹ ≠ 0.
        let t = |kind, i, j| StructureTerm {
            kind,
            i,
            j,
            coeff: ONE,
        };
        let m = LieModel::new(
            "broken",
            2,
            vec![vec![t(TermKind::Mixed, 2, 2)], vec![t(TermKind::Mixed, 1, 1)]],
        )
        .unwrap();
        assert!(!m.validate().d_squared_zero);
    }

    #[test]
    fn parse_errors_name_path() {
        let doc = r#"{"name":"bad","n":3,"dphi":[[],[],[{"type":"20","i":1,"j":1,"coeff":[1,0]}]]}"#;
        match LieModel::from_json(doc) {
            Err(Error::Parse { path, .. }) => assert_eq!(path, "dphi[2][0].j"),
            other => panic!("expected parse error, got {other:?}"),
        }
        let doc = r#"{"name":"bad","n":2,"dphi":[[],[{"type":"02","i":1,"j":2,"coeff":[1,0]}]]}"#;
        match LieModel::from_json(doc) {
            Err(Error::Parse { path, .. }) => assert_eq!(path, "dphi[1][0].type"),
            other => panic!("expected parse error, got {other:?}"),
        }
        let doc = r#"{"name":"bad","n":2,"dphi":[[]]}"#;
        assert!(matches!(LieModel::from_json(doc), Err(Error::Parse { .. })));
        let doc = r#"{"name":"bad","n":2,"dphi":[[],[{"type":"11","i":3,"j":1,"coeff":[1,0]}]]}"#;
        match LieModel::from_json(doc) {
            Err(Error::Parse { path, .. }) => assert_eq!(path, "dphi[1][0].i"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
