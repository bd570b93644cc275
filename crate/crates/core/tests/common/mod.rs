//! Exact rational reference implementation of the bigraded complex, independent of the library.
//!
//! Models are read straight from their JSON, generators are `0..n` for `φ` and `n..2n` for `φ̄`,
//! and ranks are computed by Gaussian elimination over `Q(i)`.

#![allow(dead_code)]

use num_complex::Complex;
use num_rational::Ratio;
use serde_json::Value;
use std::collections::BTreeMap;

pub type Q = Ratio<i128>;
pub type Cq = Complex<Q>;

/// Sparse form: sorted generator lists to coefficients.
pub type Exact = BTreeMap<Vec<usize>, Cq>;

fn q(x: f64) -> Q {
    let scale = 1i128 << 24;
    let num = (x * scale as f64).round();
    assert_eq!(num / scale as f64, x, "fixture coefficient {x} is not dyadic");
    Ratio::new(num as i128, scale)
}

pub fn zero() -> Cq {
    Complex::new(Q::from_integer(0), Q::from_integer(0))
}

pub fn is_zero(c: &Cq) -> bool {
    c.re == Q::from_integer(0) && c.im == Q::from_integer(0)
}

/// Sorts a word of generators, returning the permutation sign or `None` on a repeat.
pub fn sort_word(word: &[usize]) -> Option<(Vec<usize>, i32)> {
    let mut w = word.to_vec();
    let mut sign = 1;
    for i in 0..w.len() {
        for j in 0..w.len() - 1 - i {
            if w[j] == w[j + 1] {
                return None;
            }
            if w[j] > w[j + 1] {
                w.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    if w.windows(2).any(|p| p[0] == p[1]) {
        return None;
    }
    Some((w, sign))
}

fn accumulate(out: &mut Exact, word: &[usize], c: Cq) {
    if let Some((w, s)) = sort_word(word) {
        let c = if s < 0 { -c } else { c };
        let e = out.entry(w).or_insert_with(zero);
        *e += c;
    }
}

pub struct ExactModel {
    pub n: usize,
    /// Image of each of the `2n` generators under `d`, as 2-forms.
    pub dgen: Vec<Exact>,
}

impl ExactModel {
    pub fn from_json(text: &str) -> Self {
        let v: Value = serde_json::from_str(text).unwrap();
        let n = v["n"].as_u64().unwrap() as usize;
        let mut dgen = vec![Exact::new(); 2 * n];
        for (k, eq) in v["dphi"].as_array().unwrap().iter().enumerate() {
            for t in eq.as_array().unwrap() {
                let i = t["i"].as_u64().unwrap() as usize - 1;
                let j = t["j"].as_u64().unwrap() as usize - 1;
                let c = Complex::new(q(t["coeff"][0].as_f64().unwrap()), q(t["coeff"][1].as_f64().unwrap()));
                let cbar = c.conj();
                match t["type"].as_str().unwrap() {
                    "20" => {
                        accumulate(&mut dgen[k], &[i, j], c);
                        accumulate(&mut dgen[n + k], &[n + i, n + j], cbar);
                    }
                    "11" => {
                        accumulate(&mut dgen[k], &[i, n + j], c);
                        // conj(φ^i ∧ φ̄^j) = φ̄^i ∧ φ^j
                        accumulate(&mut dgen[n + k], &[n + i, j], cbar);
                    }
                    other => panic!("unknown term type {other}"),
                }
            }
        }
        ExactModel { n, dgen }
    }

    pub fn bidegree(&self, word: &[usize]) -> (usize, usize) {
        let p = word.iter().filter(|&&g| g < self.n).count();
        (p, word.len() - p)
    }

    pub fn basis(&self, p: usize, q: usize) -> Vec<Vec<usize>> {
        let n = self.n;
        let mut out = Vec::new();
        for hm in 0u32..(1 << n) {
            if hm.count_ones() as usize != p {
                continue;
            }
            for am in 0u32..(1 << n) {
                if am.count_ones() as usize != q {
                    continue;
                }
                let mut w: Vec<usize> = (0..n).filter(|i| hm >> i & 1 == 1).collect();
                w.extend((0..n).filter(|i| am >> i & 1 == 1).map(|i| n + i));
                out.push(w);
            }
        }
        out
    }

    /// `d` of a monomial, by the Leibniz rule.
    pub fn d_word(&self, word: &[usize]) -> Exact {
        let mut out = Exact::new();
        for (pos, &g) in word.iter().enumerate() {
            let sign = if pos % 2 == 0 { 1 } else { -1 };
            for (img, c) in &self.dgen[g] {
                let mut w = word[..pos].to_vec();
                w.extend(img);
                w.extend(&word[pos + 1..]);
                let c = if sign < 0 { -*c } else { *c };
                accumulate(&mut out, &w, c);
            }
        }
        out.retain(|_, c| !is_zero(c));
        out
    }

    /// Component of `d` raising the holomorphic degree by `dp` (1 for `∂`, 0 for `∂̄`).
    pub fn part(&self, word: &[usize], dp: usize) -> Exact {
        let (p, _) = self.bidegree(word);
        self.d_word(word).into_iter().filter(|(w, _)| self.bidegree(w).0 == p + dp).collect()
    }

    fn apply(&self, f: &Exact, dp: usize) -> Exact {
        let mut out = Exact::new();
        for (w, c) in f {
            for (w2, c2) in self.part(w, dp) {
                let e = out.entry(w2).or_insert_with(zero);
                *e += *c * c2;
            }
        }
        out.retain(|_, c| !is_zero(c));
        out
    }

    /// Matrix of a composite of components (applied left to right) from `(p, q)`.
    pub fn matrix(&self, p: usize, q: usize, steps: &[usize]) -> Vec<Vec<Cq>> {
        let (mut tp, mut tq) = (p, q);
        for &s in steps {
            if s == 1 { tp += 1 } else { tq += 1 }
        }
        if p > self.n || q > self.n || tp > self.n || tq > self.n {
            return Vec::new();
        }
        let rows = self.basis(tp, tq);
        let cols = self.basis(p, q);
        let mut m = vec![vec![zero(); cols.len()]; rows.len()];
        for (j, w) in cols.iter().enumerate() {
            let mut f = Exact::new();
            f.insert(w.clone(), Complex::new(Q::from_integer(1), Q::from_integer(0)));
            for &s in steps {
                f = self.apply(&f, s);
            }
            for (w2, c) in f {
                let i = rows.iter().position(|r| *r == w2).unwrap();
                m[i][j] = c;
            }
        }
        m
    }

    pub fn dim(&self, p: usize, q: usize) -> usize {
        if p > self.n || q > self.n {
            0
        } else {
            self.basis(p, q).len()
        }
    }

    fn rank_of(&self, p: isize, q: isize, steps: &[usize]) -> usize {
        if p < 0 || q < 0 {
            return 0;
        }
        rank(self.matrix(p as usize, q as usize, steps))
    }

    pub fn bott_chern(&self, p: usize, q: usize) -> usize {
        let stacked = vstack(self.matrix(p, q, &[1]), self.matrix(p, q, &[0]), self.dim(p, q));
        let kernel = self.dim(p, q) - rank(stacked);
        kernel - self.rank_of(p as isize - 1, q as isize - 1, &[0, 1])
    }

    pub fn aeppli(&self, p: usize, q: usize) -> usize {
        let kernel = self.dim(p, q) - self.rank_of(p as isize, q as isize, &[0, 1]);
        let a = if p > 0 { self.matrix(p - 1, q, &[1]) } else { Vec::new() };
        let b = if q > 0 { self.matrix(p, q - 1, &[0]) } else { Vec::new() };
        kernel - rank(hstack(a, b, self.dim(p, q)))
    }

    pub fn dolbeault(&self, p: usize, q: usize) -> usize {
        let kernel = self.dim(p, q) - self.rank_of(p as isize, q as isize, &[0]);
        kernel - self.rank_of(p as isize, q as isize - 1, &[0])
    }

    fn total_basis(&self, k: usize) -> Vec<Vec<usize>> {
        (0..=k.min(self.n)).filter(|&p| k - p <= self.n).flat_map(|p| self.basis(p, k - p)).collect()
    }

    pub fn betti(&self, k: usize) -> usize {
        let d_rank = |k: usize| -> usize {
            let (rows, cols) = (self.total_basis(k + 1), self.total_basis(k));
            let mut m = vec![vec![zero(); cols.len()]; rows.len()];
            for (j, w) in cols.iter().enumerate() {
                for (w2, c) in self.d_word(w) {
                    let i = rows.iter().position(|r| *r == w2).unwrap();
                    m[i][j] = c;
                }
            }
            rank(m)
        };
        let below = if k > 0 { d_rank(k - 1) } else { 0 };
        self.total_basis(k).len() - d_rank(k) - below
    }
}

fn vstack(a: Vec<Vec<Cq>>, b: Vec<Vec<Cq>>, _cols: usize) -> Vec<Vec<Cq>> {
    a.into_iter().chain(b).collect()
}

fn hstack(a: Vec<Vec<Cq>>, b: Vec<Vec<Cq>>, rows: usize) -> Vec<Vec<Cq>> {
    (0..rows)
        .map(|i| {
            let mut r = a.get(i).cloned().unwrap_or_default();
            r.extend(b.get(i).cloned().unwrap_or_default());
            r
        })
        .collect()
}

/// Exact rank by Gaussian elimination.
pub fn rank(mut m: Vec<Vec<Cq>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..rows).find(|&i| !is_zero(&m[i][c])) else { continue };
        m.swap(r, piv);
        let inv = Complex::new(Q::from_integer(1), Q::from_integer(0)) / m[r][c];
        let pivot = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !is_zero(&row[c]) {
                let f = row[c] * inv;
                for (x, &y) in row[c..].iter_mut().zip(&pivot[c..]) {
                    *x -= f * y;
                }
            }
        }
        r += 1;
    }
    r
}

/// Model fixture path, valid from both the core and the cli crate.
pub fn fixture_path(name: &str) -> std::path::PathBuf {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let local = root.join("fixtures/models");
    let dir = if local.is_dir() { local } else { root.join("../core/fixtures/models") };
    dir.join(format!("{name}.json"))
}

pub fn exact_fixture(name: &str) -> ExactModel {
    ExactModel::from_json(&std::fs::read_to_string(fixture_path(name)).unwrap())
}
