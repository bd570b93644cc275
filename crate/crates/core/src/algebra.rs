//! Bigraded exterior algebra on the complexified dual of a Lie algebra.
//!
//! A basis monomial `φ^I ∧ φ̄^J` is stored as a pair of bitmasks. For sign
//! bookkeeping the `2n` generators are ordered `φ^1, …, φ^n, φ̄^1, …, φ̄^n`,
//! so every monomial is the ordered product of its holomorphic factors followed
//! by its antiholomorphic factors.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Complex = Complex64;

pub(crate) const ZERO: Complex = Complex::new(0.0, 0.0);
pub(crate) const ONE: Complex = Complex::new(1.0, 0.0);
pub(crate) const I: Complex = Complex::new(0.0, 1.0);

/// Largest complex dimension supported by the mask representation.
pub const MAX_DIM: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bidegree {
    pub p: usize,
    pub q: usize,
}

impl Bidegree {
    pub const fn new(p: usize, q: usize) -> Self {
        Bidegree { p, q }
    }

    pub fn degree(&self) -> usize {
        self.p + self.q
    }

    /// Shift by `(dp, dq)`, returning `None` when the result leaves `0..=n`.
    pub fn shift(&self, n: usize, dp: isize, dq: isize) -> Option<Bidegree> {
        let p = self.p as isize + dp;
        let q = self.q as isize + dq;
        if p < 0 || q < 0 || p > n as isize || q > n as isize {
            None
        } else {
            Some(Bidegree::new(p as usize, q as usize))
        }
    }

    pub fn dim(&self, n: usize) -> usize {
        binomial(n, self.p) * binomial(n, self.q)
    }
}

impl fmt::Display for Bidegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.p, self.q)
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Basis label `φ^I ∧ φ̄^J`; `holo` and `anti` are bitmasks, bit `k-1` standing for index `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    holo: u32,
    anti: u32,
}

impl MultiIndex {
    /// Build from 1-based, strictly increasing index lists.
    pub fn new(n: usize, holo: &[usize], anti: &[usize]) -> Result<Self> {
        Ok(MultiIndex {
            holo: mask_from_indices(n, holo, "holo")?,
            anti: mask_from_indices(n, anti, "anti")?,
        })
    }

    pub const fn from_masks(holo: u32, anti: u32) -> Self {
        MultiIndex { holo, anti }
    }

    pub fn holo_mask(&self) -> u32 {
        self.holo
    }

    pub fn anti_mask(&self) -> u32 {
        self.anti
    }

    pub fn holo(&self) -> Vec<usize> {
        mask_indices(self.holo)
    }

    pub fn anti(&self) -> Vec<usize> {
        mask_indices(self.anti)
    }

    pub fn bidegree(&self) -> Bidegree {
        Bidegree::new(self.holo.count_ones() as usize, self.anti.count_ones() as usize)
    }

    /// Mask over the ordered generators `φ^1..φ^n, φ̄^1..φ̄^n`.
    pub(crate) fn combined(&self, n: usize) -> u64 {
        self.holo as u64 | ((self.anti as u64) << n)
    }

    pub(crate) fn from_combined(n: usize, m: u64) -> Self {
        let low = (1u64 << n) - 1;
        MultiIndex {
            holo: (m & low) as u32,
            anti: ((m >> n) & low) as u32,
        }
    }
}

fn mask_from_indices(n: usize, idx: &[usize], label: &str) -> Result<u32> {
    let mut mask = 0u32;
    let mut prev = 0usize;
    for (pos, &i) in idx.iter().enumerate() {
        if i == 0 || i > n {
            return Err(Error::parse(
                format!("{label}[{pos}]"),
                format!("index {i} outside 1..={n}"),
            ));
        }
        if i <= prev {
            return Err(Error::parse(
                format!("{label}[{pos}]"),
                "indices must be strictly increasing",
            ));
        }
        prev = i;
        mask |= 1 << (i - 1);
    }
    Ok(mask)
}

fn mask_indices(mask: u32) -> Vec<usize> {
    (0..32).filter(|b| mask & (1 << b) != 0).map(|b| b + 1).collect()
}

/// Lexicographic comparison of sorted index tuples of equal length.
fn lex_cmp(a: u32, b: u32) -> Ordering {
    let diff = a ^ b;
    if diff == 0 {
        Ordering::Equal
    } else if a & (diff & diff.wrapping_neg()) != 0 {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bidegree()
            .cmp(&other.bidegree())
            .then_with(|| lex_cmp(self.holo, other.holo))
            .then_with(|| lex_cmp(self.anti, other.anti))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = self.holo();
        let a = self.anti();
        if h.is_empty() && a.is_empty() {
            return write!(f, "1");
        }
        let mut parts: Vec<String> = h.iter().map(|i| format!("φ{i}")).collect();
        parts.extend(a.iter().map(|i| format!("φ̄{i}")));
        write!(f, "{}", parts.join("∧"))
    }
}

/// All `k`-subsets of `0..n` as bitmasks, in lexicographic order.
pub(crate) fn subsets(n: usize, k: usize) -> Vec<u32> {
    fn rec(start: usize, n: usize, k: usize, acc: u32, out: &mut Vec<u32>) {
        if k == 0 {
            out.push(acc);
            return;
        }
        for i in start..=n - k {
            rec(i + 1, n, k - 1, acc | (1 << i), out);
        }
    }
    let mut out = Vec::with_capacity(binomial(n, k));
    if k <= n {
        rec(0, n, k, 0, &mut out);
    }
    out
}

/// Position of a `k`-subset mask in the order produced by [`subsets`].
pub(crate) fn subset_rank(n: usize, mask: u32) -> usize {
    let k = mask.count_ones() as usize;
    let mut rank = 0;
    let mut prev: isize = -1;
    let mut taken = 0;
    for c in 0..n {
        if mask & (1 << c) == 0 {
            continue;
        }
        for j in (prev + 1) as usize..c {
            rank += binomial(n - 1 - j, k - 1 - taken);
        }
        prev = c as isize;
        taken += 1;
    }
    rank
}

/// Canonical basis of `Λ^{p,q}`: holomorphic part major, both lexicographic.
pub fn basis(n: usize, b: Bidegree) -> Vec<MultiIndex> {
    let anti = subsets(n, b.q);
    subsets(n, b.p)
        .into_iter()
        .flat_map(|h| anti.iter().map(move |&a| MultiIndex::from_masks(h, a)))
        .collect()
}

pub fn basis_position(n: usize, mi: &MultiIndex) -> usize {
    let b = mi.bidegree();
    subset_rank(n, mi.holo) * binomial(n, b.q) + subset_rank(n, mi.anti)
}

/// Sign of `e_a ∧ e_b` relative to the ordered monomial `e_{a∪b}`; `None` if they overlap.
pub(crate) fn merge_sign(a: u64, b: u64) -> Option<f64> {
    if a & b != 0 {
        return None;
    }
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let bit = rest.trailing_zeros();
        inversions += (a >> bit).count_ones();
        rest &= rest - 1;
    }
    Some(if inversions.is_multiple_of(2) { 1.0 } else { -1.0 })
}

/// Coefficient of `i^n φ¹∧φ̄¹∧…∧φⁿ∧φ̄ⁿ` against the ordered monomial `φ^{1..n}∧φ̄^{1..n}`:
/// `i^n (−1)^{n(n−1)/2}`.
pub(crate) fn volume_normalization(n: usize) -> Complex {
    let sign = if (n * n.saturating_sub(1) / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    I.powu(n as u32) * sign
}

/// The identity-metric volume form `i^n φ¹∧φ̄¹∧…∧φⁿ∧φ̄ⁿ`.
pub fn unit_volume(n: usize) -> Form {
    let full = (1u32 << n) - 1;
    Form::monomial(n, MultiIndex::from_masks(full, full), volume_normalization(n))
}

/// Sparse form of definite bidegree. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct Form {
    n: usize,
    bidegree: Bidegree,
    coeffs: BTreeMap<MultiIndex, Complex>,
}

impl Form {
    pub fn zero(n: usize, bidegree: Bidegree) -> Self {
        Form {
            n,
            bidegree,
            coeffs: BTreeMap::new(),
        }
    }

    /// The constant function `c`.
    pub fn scalar(n: usize, c: Complex) -> Self {
        let mut f = Form::zero(n, Bidegree::new(0, 0));
        f.add_term(MultiIndex::from_masks(0, 0), c);
        f
    }

    pub fn monomial(n: usize, mi: MultiIndex, c: Complex) -> Self {
        let mut f = Form::zero(n, mi.bidegree());
        f.add_term(mi, c);
        f
    }

    /// Convenience constructor from 1-based index lists.
    pub fn term(n: usize, holo: &[usize], anti: &[usize], c: Complex) -> Result<Self> {
        Ok(Form::monomial(n, MultiIndex::new(n, holo, anti)?, c))
    }

    pub fn from_terms<T>(n: usize, bidegree: Bidegree, terms: T) -> Result<Self>
    where
        T: IntoIterator<Item = (MultiIndex, Complex)>,
    {
        let mut f = Form::zero(n, bidegree);
        for (mi, c) in terms {
            if mi.bidegree() != bidegree {
                return Err(Error::Dimension(format!(
                    "term {mi} does not have bidegree {bidegree}"
                )));
            }
            f.add_term(mi, c);
        }
        Ok(f)
    }

    pub fn from_vector(n: usize, bidegree: Bidegree, v: &[Complex]) -> Self {
        let mut f = Form::zero(n, bidegree);
        for (mi, &c) in basis(n, bidegree).into_iter().zip(v) {
            f.add_term(mi, c);
        }
        f
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bidegree(&self) -> Bidegree {
        self.bidegree
    }

    pub fn degree(&self) -> usize {
        self.bidegree.degree()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, mi: &MultiIndex) -> Complex {
        self.coeffs.get(mi).copied().unwrap_or(ZERO)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub(crate) fn add_term(&mut self, mi: MultiIndex, c: Complex) {
        debug_assert_eq!(mi.bidegree(), self.bidegree);
        let entry = self.coeffs.entry(mi).or_insert(ZERO);
        *entry += c;
        if *entry == ZERO {
            self.coeffs.remove(&mi);
        }
    }

    pub fn to_vector(&self) -> DVector<Complex> {
        let mut v = DVector::from_element(self.bidegree.dim(self.n), ZERO);
        for (mi, &c) in &self.coeffs {
            v[basis_position(self.n, mi)] = c;
        }
        v
    }

    /// Euclidean norm of the coefficient vector in the canonical basis.
    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Drop coefficients with modulus at most `tol`.
    pub fn pruned(&self, tol: f64) -> Form {
        let mut f = self.clone();
        f.coeffs.retain(|_, c| c.norm() > tol);
        f
    }

    pub fn scale(&self, c: Complex) -> Form {
        let mut f = Form::zero(self.n, self.bidegree);
        if c != ZERO {
            for (&mi, &v) in &self.coeffs {
                f.add_term(mi, v * c);
            }
        }
        f
    }

    pub fn scale_real(&self, c: f64) -> Form {
        self.scale(Complex::new(c, 0.0))
    }

    pub fn add(&self, other: &Form) -> Form {
        assert_eq!(self.bidegree, other.bidegree, "adding forms of different bidegree");
        let mut f = self.clone();
        for (&mi, &c) in &other.coeffs {
            f.add_term(mi, c);
        }
        f
    }

    pub fn sub(&self, other: &Form) -> Form {
        self.add(&other.scale_real(-1.0))
    }

    /// Exterior product with exact Koszul signs. Overflowing bidegrees give an empty
    /// form that keeps the nominal bidegree.
    pub fn wedge(&self, other: &Form) -> Form {
        assert_eq!(self.n, other.n, "wedge of forms over different models");
        let n = self.n;
        let p = self.bidegree.p + other.bidegree.p;
        let q = self.bidegree.q + other.bidegree.q;
        let mut out = Form::zero(n, Bidegree::new(p, q));
        if p > n || q > n {
            return out;
        }
        for (a, &ca) in &self.coeffs {
            let ma = a.combined(n);
            for (b, &cb) in &other.coeffs {
                if let Some(s) = merge_sign(ma, b.combined(n)) {
                    out.add_term(MultiIndex::from_combined(n, ma | b.combined(n)), ca * cb * s);
                }
            }
        }
        out
    }

    /// `u^k` (with `u^0 = 1`).
    pub fn power(&self, k: usize) -> Form {
        let mut acc = Form::scalar(self.n, ONE);
        for _ in 0..k {
            acc = acc.wedge(self);
        }
        acc
    }

    /// Complex conjugate: `conj(c φ^I∧φ̄^J) = conj(c) (-1)^{|I||J|} φ^J∧φ̄^I`.
    pub fn conjugate(&self) -> Form {
        let mut out = Form::zero(self.n, Bidegree::new(self.bidegree.q, self.bidegree.p));
        for (mi, &c) in &self.coeffs {
            let sign = if (mi.holo.count_ones() * mi.anti.count_ones()) % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            out.add_term(MultiIndex::from_masks(mi.anti, mi.holo), c.conj() * sign);
        }
        out
    }

    /// Integral of an `(n,n)`-form, normalized so that the identity-metric volume
    /// form `i^n φ¹∧φ̄¹∧…∧φⁿ∧φ̄ⁿ` integrates to 1. Lower-degree forms integrate to 0.
    pub fn integral(&self) -> Complex {
        let n = self.n;
        if self.bidegree != Bidegree::new(n, n) {
            return ZERO;
        }
        let full = (1u32 << n) - 1;
        self.coeff(&MultiIndex::from_masks(full, full)) / volume_normalization(n)
    }

    /// Largest coefficient modulus of `self - conj(self)`; zero iff the form is real.
    pub fn reality_residual(&self) -> f64 {
        if self.bidegree.p != self.bidegree.q {
            return self.coeff_norm();
        }
        self.sub(&self.conjugate()).coeff_norm()
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(mi, c)| format!("({}{:+}i)·{}", c.re, c.im, mi))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// A direct sum of bidegree components `⊕ Λ^{p,q}`, in ascending bidegree order.
/// Coordinates are the concatenation of the canonical bases of the parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FormSpace {
    n: usize,
    parts: Vec<Bidegree>,
}

impl FormSpace {
    pub fn new(n: usize, mut parts: Vec<Bidegree>) -> Self {
        parts.retain(|b| b.p <= n && b.q <= n);
        parts.sort();
        parts.dedup();
        FormSpace { n, parts }
    }

    pub fn empty(n: usize) -> Self {
        FormSpace { n, parts: Vec::new() }
    }

    pub fn single(n: usize, b: Bidegree) -> Self {
        FormSpace::new(n, vec![b])
    }

    /// `Λ^{p,q}` for possibly out-of-range `(p, q)`; out of range gives the zero space.
    pub fn at(n: usize, p: isize, q: isize) -> Self {
        match Bidegree::new(0, 0).shift(n, p, q) {
            Some(b) => FormSpace::single(n, b),
            None => FormSpace::empty(n),
        }
    }

    /// All bidegrees of total degree `k`.
    pub fn degree(n: usize, k: usize) -> Self {
        let parts = (0..=k.min(n))
            .filter(|&p| k - p <= n)
            .map(|p| Bidegree::new(p, k - p))
            .collect();
        FormSpace::new(n, parts)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn parts(&self) -> &[Bidegree] {
        &self.parts
    }

    pub fn dim(&self) -> usize {
        self.parts.iter().map(|b| b.dim(self.n)).sum()
    }

    pub fn offset(&self, b: Bidegree) -> Option<usize> {
        let mut off = 0;
        for part in &self.parts {
            if *part == b {
                return Some(off);
            }
            off += part.dim(self.n);
        }
        None
    }

    /// Shift every part, dropping those that leave the valid range.
    pub fn shifted(&self, dp: isize, dq: isize) -> FormSpace {
        FormSpace::new(
            self.n,
            self.parts.iter().filter_map(|b| b.shift(self.n, dp, dq)).collect(),
        )
    }

    pub fn union(&self, other: &FormSpace) -> FormSpace {
        let mut parts = self.parts.clone();
        parts.extend_from_slice(&other.parts);
        FormSpace::new(self.n, parts)
    }

    /// Coordinates of `u` in this space. Fails if its bidegree is not a part.
    pub fn coords(&self, u: &Form) -> Result<DVector<Complex>> {
        let off = self.offset(u.bidegree()).ok_or_else(|| {
            Error::Dimension(format!("bidegree {} not in space {self}", u.bidegree()))
        })?;
        let mut v = DVector::from_element(self.dim(), ZERO);
        for (mi, &c) in u.terms() {
            v[off + basis_position(self.n, mi)] = c;
        }
        Ok(v)
    }

    /// Split a coordinate vector back into one form per part.
    pub fn forms(&self, v: &DVector<Complex>) -> Vec<Form> {
        let mut out = Vec::with_capacity(self.parts.len());
        let mut off = 0;
        for b in &self.parts {
            let d = b.dim(self.n);
            out.push(Form::from_vector(self.n, *b, &v.as_slice()[off..off + d]));
            off += d;
        }
        out
    }

    /// The unique form of a single-part space.
    pub fn form(&self, v: &DVector<Complex>) -> Form {
        assert_eq!(self.parts.len(), 1, "space {self} is not a single bidegree");
        self.forms(v).pop().unwrap()
    }
}

impl fmt::Display for FormSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.parts.iter().map(|b| format!("Λ{b}")).collect();
        write!(f, "{}", parts.join("⊕"))
    }
}

/// JSON document for a single-bidegree form:
/// `{"name", "bidegree": [p, q], "terms": [{"holo": [..], "anti": [..], "coeff": [re, im]}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub bidegree: [usize; 2],
    pub terms: Vec<TermDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermDoc {
    pub holo: Vec<usize>,
    pub anti: Vec<usize>,
    pub coeff: [f64; 2],
}

impl FormDoc {
    pub fn from_form(u: &Form) -> Self {
        FormDoc {
            name: None,
            bidegree: [u.bidegree.p, u.bidegree.q],
            terms: u
                .terms()
                .map(|(mi, c)| TermDoc {
                    holo: mi.holo(),
                    anti: mi.anti(),
                    coeff: [c.re, c.im],
                })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::parse(path, e.into_inner().to_string())
        })
    }

    /// Build the form in complex dimension `n`, validating every index.
    pub fn to_form(&self, n: usize) -> Result<Form> {
        let [p, q] = self.bidegree;
        if p > n || q > n {
            return Err(Error::parse("bidegree", format!("({p},{q}) out of range for n = {n}")));
        }
        let b = Bidegree::new(p, q);
        let mut f = Form::zero(n, b);
        for (t, term) in self.terms.iter().enumerate() {
            let mi = MultiIndex::new(n, &term.holo, &term.anti)
                .map_err(|e| Error::parse(format!("terms[{t}]"), e.to_string()))?;
            if mi.bidegree() != b {
                return Err(Error::parse(
                    format!("terms[{t}]"),
                    format!("term has bidegree {}, expected {b}", mi.bidegree()),
                ));
            }
            let c = Complex::new(term.coeff[0], term.coeff[1]);
            if !c.is_finite() {
                return Err(Error::parse(format!("terms[{t}].coeff"), "coefficient is not finite"));
            }
            let mut single = Form::zero(n, b);
            single.add_term(mi, c);
            f = f.add(&single);
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn repeated_generator_wedges_to_zero() {
        let phi1 = Form::term(3, &[1], &[], ONE).unwrap();
        assert!(phi1.wedge(&phi1).is_empty());
    }

    #[test]
    fn phi_wedge_phibar_is_basis_form() {
        let phi1 = Form::term(2, &[1], &[], ONE).unwrap();
        let bar1 = Form::term(2, &[], &[1], ONE).unwrap();
        let w = phi1.wedge(&bar1);
        assert_eq!(w, Form::term(2, &[1], &[1], ONE).unwrap());
        // φ̄¹∧φ¹ = −φ¹∧φ̄¹
        assert_eq!(bar1.wedge(&phi1), w.scale_real(-1.0));
    }

    #[test]
    fn even_forms_commute() {
        let a = Form::term(2, &[1], &[1], ONE).unwrap();
        let b = Form::term(2, &[2], &[2], ONE).unwrap();
        assert_eq!(a.wedge(&b), b.wedge(&a));
        assert_eq!(a.wedge(&b), Form::term(2, &[1, 2], &[1, 2], -ONE).unwrap());
    }

    #[test]
    fn overflow_is_empty() {
        let a = Form::term(1, &[1], &[], ONE).unwrap();
        let b = Form::term(1, &[1], &[1], ONE).unwrap();
        let w = a.wedge(&b);
        assert!(w.is_empty());
        assert_eq!(w.bidegree(), Bidegree::new(2, 1));
    }

    #[test]
    fn conjugation_of_real_11_form() {
        let phi1 = Form::term(1, &[1], &[], ONE).unwrap();
        assert_eq!(phi1.conjugate(), Form::term(1, &[], &[1], ONE).unwrap());
        let u = Form::term(2, &[1], &[1], I).unwrap();
        assert_eq!(u.conjugate(), u);
        assert!(u.reality_residual() == 0.0);
        let v = Form::term(2, &[1], &[2], c(1.0, 2.0)).unwrap();
        assert_eq!(v.conjugate().conjugate(), v);
    }

    #[test]
    fn unit_volume_integrates_to_one() {
        for n in 1..=4 {
            assert!((unit_volume(n).integral() - ONE).norm() < 1e-15);
            // ω^n / n! for ω = i Σ φ^j∧φ̄^j is the unit volume
            let mut omega = Form::zero(n, Bidegree::new(1, 1));
            for j in 1..=n {
                omega = omega.add(&Form::term(n, &[j], &[j], I).unwrap());
            }
            let fact: f64 = (1..=n).map(|k| k as f64).product();
            let top = omega.power(n).scale_real(1.0 / fact);
            assert_eq!(top, unit_volume(n));
            assert!(unit_volume(n).reality_residual() == 0.0);
        }
    }

    #[test]
    fn dimensions_are_binomial_products() {
        for n in 1..=4 {
            for p in 0..=n {
                for q in 0..=n {
                    let b = Bidegree::new(p, q);
                    let basis = basis(n, b);
                    assert_eq!(basis.len(), binomial(n, p) * binomial(n, q));
                    for (i, mi) in basis.iter().enumerate() {
                        assert_eq!(basis_position(n, mi), i);
                    }
                    let mut sorted = basis.clone();
                    sorted.sort();
                    assert_eq!(sorted, basis);
                }
            }
        }
    }

    #[test]
    fn multi_index_rejects_bad_input() {
        assert!(MultiIndex::new(3, &[1, 1], &[]).is_err());
        assert!(MultiIndex::new(3, &[2, 1], &[]).is_err());
        assert!(MultiIndex::new(3, &[], &[4]).is_err());
        assert!(MultiIndex::new(3, &[0], &[]).is_err());
    }

    #[test]
    fn degree_space_layout() {
        let s = FormSpace::degree(2, 2);
        assert_eq!(
            s.parts(),
            &[Bidegree::new(0, 2), Bidegree::new(1, 1), Bidegree::new(2, 0)]
        );
        assert_eq!(s.dim(), 6);
        assert_eq!(FormSpace::at(2, -1, 0).dim(), 0);
        assert_eq!(FormSpace::degree(2, 5).dim(), 0);
    }
}
