//! Dense complex linear algebra helpers: numerical rank, kernels, ranges and
//! minimum-norm least squares, all thresholded by `τ = dim · ε · σ_max` unless
//! an explicit relative factor is supplied.

use nalgebra::{DMatrix, DVector};

use crate::algebra::{Complex, ZERO};

/// Threshold factor: `rel.unwrap_or(dim · ε) · σ_max`.
pub fn threshold(max_value: f64, nrows: usize, ncols: usize, rel: Option<f64>) -> f64 {
    let dim = nrows.max(ncols).max(1) as f64;
    rel.unwrap_or(dim * f64::EPSILON) * max_value
}

pub fn singular_values(a: &DMatrix<Complex>) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    s
}

pub fn rank(a: &DMatrix<Complex>, rel: Option<f64>) -> usize {
    let s = singular_values(a);
    let Some(&smax) = s.first() else { return 0 };
    if smax == 0.0 {
        return 0;
    }
    let tau = threshold(smax, a.nrows(), a.ncols(), rel);
    s.iter().filter(|&&x| x > tau).count()
}

/// Full SVD with singular triplets sorted by decreasing value.
struct SortedSvd {
    u: DMatrix<Complex>,
    s: Vec<f64>,
    v: DMatrix<Complex>,
}

fn sorted_svd(a: &DMatrix<Complex>) -> SortedSvd {
    let (m, n) = a.shape();
    // nalgebra's thin SVD only returns min(m, n) right vectors; pad to square for kernels.
    let padded = if m < n {
        let mut p = DMatrix::from_element(n, n, ZERO);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(true, true);
    let u = svd.u.unwrap();
    let v_t = svd.v_t.unwrap();
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].partial_cmp(&svd.singular_values[i]).unwrap());
    let s = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u_rows = if m < n { m } else { u.nrows() };
    let u = DMatrix::from_fn(u_rows, order.len(), |r, c| u[(r, order[c])]);
    let v = DMatrix::from_fn(v_t.ncols(), order.len(), |r, c| v_t[(order[c], r)].conj());
    SortedSvd { u, s, v }
}

/// Orthonormal basis (columns) of the kernel.
pub fn null_space(a: &DMatrix<Complex>, rel: Option<f64>) -> DMatrix<Complex> {
    let (m, n) = a.shape();
    if n == 0 {
        return DMatrix::from_element(0, 0, ZERO);
    }
    if m == 0 {
        return DMatrix::identity(n, n);
    }
    let svd = sorted_svd(a);
    let smax = svd.s.first().copied().unwrap_or(0.0);
    let r = if smax == 0.0 {
        0
    } else {
        let tau = threshold(smax, m, n, rel);
        svd.s.iter().filter(|&&x| x > tau).count()
    };
    // With padding the right factor is n×n; without it there are min(m, n) = n columns.
    svd.v.columns(r, n - r).into_owned()
}

/// Orthonormal basis (columns) of the column space.
pub fn range_space(a: &DMatrix<Complex>, rel: Option<f64>) -> DMatrix<Complex> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return DMatrix::from_element(m, 0, ZERO);
    }
    let svd = sorted_svd(a);
    let smax = svd.s[0];
    if smax == 0.0 {
        return DMatrix::from_element(m, 0, ZERO);
    }
    let tau = threshold(smax, m, n, rel);
    let r = svd.s.iter().filter(|&&x| x > tau).count();
    svd.u.columns(0, r).into_owned()
}

/// Minimum-norm least-squares solution of `a x = b` via the thresholded pseudo-inverse.
pub fn lstsq(a: &DMatrix<Complex>, b: &DVector<Complex>, rel: Option<f64>) -> DVector<Complex> {
    let (m, n) = a.shape();
    if n == 0 {
        return DVector::from_element(0, ZERO);
    }
    if m == 0 {
        return DVector::from_element(n, ZERO);
    }
    let svd = sorted_svd(a);
    let smax = svd.s[0];
    let mut x = DVector::from_element(n, ZERO);
    if smax == 0.0 {
        return x;
    }
    let tau = threshold(smax, m, n, rel);
    for (k, &s) in svd.s.iter().enumerate() {
        if s <= tau {
            break;
        }
        let uk = svd.u.column(k);
        let coeff = uk.dotc(b) / s;
        x += svd.v.column(k) * coeff;
    }
    x
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(a: &DMatrix<Complex>) -> (Vec<f64>, DMatrix<Complex>) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::from_element(0, 0, ZERO));
    }
    let sym = (a + a.adjoint()) * Complex::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn min_eigenvalue(a: &DMatrix<Complex>) -> f64 {
    hermitian_eigen(a).0.first().copied().unwrap_or(0.0)
}

/// Largest entry modulus; zero for empty matrices.
pub fn max_abs(a: &DMatrix<Complex>) -> f64 {
    a.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Horizontal concatenation of blocks with equal row counts.
pub fn hstack(blocks: &[&DMatrix<Complex>]) -> DMatrix<Complex> {
    let rows = blocks.first().map(|b| b.nrows()).unwrap_or(0);
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::from_element(rows, cols, ZERO);
    let mut off = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows);
        out.view_mut((0, off), (rows, b.ncols())).copy_from(*b);
        off += b.ncols();
    }
    out
}

/// Vertical concatenation of blocks with equal column counts.
pub fn vstack(blocks: &[&DMatrix<Complex>]) -> DMatrix<Complex> {
    let cols = blocks.first().map(|b| b.ncols()).unwrap_or(0);
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::from_element(rows, cols, ZERO);
    let mut off = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols);
        out.view_mut((off, 0), (b.nrows(), cols)).copy_from(*b);
        off += b.nrows();
    }
    out
}

/// Block-diagonal assembly.
pub fn block_diag(blocks: &[DMatrix<Complex>]) -> DMatrix<Complex> {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::from_element(rows, cols, ZERO);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), b.shape()).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Determinant of the square submatrix on the given row and column bitmasks.
pub fn minor(a: &DMatrix<Complex>, rows: u32, cols: u32) -> Complex {
    let r: Vec<usize> = (0..32).filter(|b| rows & (1 << b) != 0).collect();
    let c: Vec<usize> = (0..32).filter(|b| cols & (1 << b) != 0).collect();
    debug_assert_eq!(r.len(), c.len());
    if r.is_empty() {
        return Complex::new(1.0, 0.0);
    }
    DMatrix::from_fn(r.len(), c.len(), |i, j| a[(r[i], c[j])]).determinant()
}
