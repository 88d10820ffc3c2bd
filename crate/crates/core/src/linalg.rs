//! Dense complex matrices and the handful of factorizations the analysis needs:
//! Hermitian Cholesky, Hermitian inverse, log-determinant and Householder QR.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Index, IndexMut, Mul};

use num_complex::Complex64;

use crate::error::{domain, invalid};
use crate::math;
use crate::Result;

pub type C64 = Complex64;

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major entries, rejecting a wrong entry count
    /// or non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(invalid!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            ));
        }
        if !data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(invalid!("matrix entries must be finite"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: f64) -> CMat {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `Hᴴ H`.
    pub fn gram(&self) -> CMat {
        let mut g = CMat::zeros(self.cols, self.cols);
        for i in 0..self.cols {
            for j in i..self.cols {
                let mut acc = C64::new(0.0, 0.0);
                for r in 0..self.rows {
                    acc += self[(r, i)].conj() * self[(r, j)];
                }
                g[(i, j)] = acc;
                g[(j, i)] = acc.conj();
            }
            g[(i, i)].im = 0.0;
        }
        g
    }

    /// `H Hᴴ`.
    pub fn outer_gram(&self) -> CMat {
        let mut g = CMat::zeros(self.rows, self.rows);
        for i in 0..self.rows {
            for j in i..self.rows {
                let acc: C64 = self
                    .row(i)
                    .iter()
                    .zip(self.row(j))
                    .map(|(a, b)| a * b.conj())
                    .sum();
                g[(i, j)] = acc;
                g[(j, i)] = acc.conj();
            }
            g[(i, i)].im = 0.0;
        }
        g
    }

    /// Real part of `vᴴ M v`.
    pub fn quadratic_form(&self, v: &[C64]) -> f64 {
        debug_assert!(self.is_square() && v.len() == self.rows);
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.rows {
            let mut inner = C64::new(0.0, 0.0);
            for j in 0..self.cols {
                inner += self[(i, j)] * v[j];
            }
            acc += v[i].conj() * inner;
        }
        acc.re
    }

    /// Horizontal concatenation `[A₁ A₂ …]`.
    pub fn hconcat(blocks: &[&CMat]) -> Result<CMat> {
        let Some(first) = blocks.first() else {
            return Err(invalid!("nothing to concatenate"));
        };
        let rows = first.rows;
        if blocks.iter().any(|b| b.rows != rows) {
            return Err(invalid!("row counts differ in horizontal concatenation"));
        }
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = CMat::zeros(rows, cols);
        let mut offset = 0;
        for b in blocks {
            for i in 0..rows {
                for j in 0..b.cols {
                    out[(i, offset + j)] = b[(i, j)];
                }
            }
            offset += b.cols;
        }
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `(M + Mᴴ)/2`; removes rounding asymmetry from products that are
    /// Hermitian in exact arithmetic.
    pub fn hermitian_part(&self) -> CMat {
        debug_assert!(self.is_square());
        let mut h = self.clone();
        for i in 0..h.rows {
            h[(i, i)].im = 0.0;
            for j in i + 1..h.cols {
                let avg = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
                h[(i, j)] = avg;
                h[(j, i)] = avg.conj();
            }
        }
        h
    }

    /// Largest deviation of `self` from its own conjugate transpose.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Rows permuted so that row `i` of the output is row `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> CMat {
        CMat::from_fn(self.rows, self.cols, |i, j| self[(perm[i], j)])
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMat {
    type Output = CMat;

    fn mul(self, rhs: &CMat) -> CMat {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = CMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Add for &CMat {
    type Output = CMat;

    fn add(self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

fn check_hermitian(k: &CMat) -> Result<()> {
    if !k.is_square() {
        return Err(invalid!(
            "expected a square matrix, got {}x{}",
            k.rows,
            k.cols
        ));
    }
    if !k.is_finite() {
        return Err(domain!("matrix has non-finite entries"));
    }
    let scale = k.data.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if k.hermitian_defect() > 1e-10 * scale {
        return Err(domain!("matrix is not Hermitian"));
    }
    Ok(())
}

/// Lower-triangular `L` with `L Lᴴ = K` and a real positive diagonal.
pub fn cholesky_lower(k: &CMat) -> Result<CMat> {
    check_hermitian(k)?;
    let n = k.rows;
    let mut l = CMat::zeros(n, n);
    for j in 0..n {
        let mut d = k[(j, j)].re;
        for p in 0..j {
            d -= l[(j, p)].norm_sqr();
        }
        if !(d > 0.0) {
            return Err(domain!(
                "matrix is not positive definite (pivot {j} = {d:e})"
            ));
        }
        let djj = math::sqrt(d);
        l[(j, j)] = C64::new(djj, 0.0);
        for i in j + 1..n {
            let mut s = k[(i, j)];
            for p in 0..j {
                s -= l[(i, p)] * l[(j, p)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Inverse of a lower-triangular matrix with non-zero diagonal.
pub fn lower_triangular_inverse(l: &CMat) -> CMat {
    let n = l.rows;
    let mut inv = CMat::zeros(n, n);
    for col in 0..n {
        for i in col..n {
            let mut s = if i == col {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            };
            for p in col..i {
                s -= l[(i, p)] * inv[(p, col)];
            }
            inv[(i, col)] = s / l[(i, i)];
        }
    }
    inv
}

/// Inverse of a Hermitian positive-definite matrix via its Cholesky factor.
pub fn hermitian_inverse(k: &CMat) -> Result<CMat> {
    let l = cholesky_lower(k)?;
    let linv = lower_triangular_inverse(&l);
    Ok((&linv.adjoint() * &linv).hermitian_part())
}

/// `log₂ det K` for Hermitian positive-definite `K`.
pub fn log2_det_hpd(k: &CMat) -> Result<f64> {
    let l = cholesky_lower(k)?;
    Ok(2.0 * (0..l.rows).map(|i| math::log2(l[(i, i)].re)).sum::<f64>())
}

/// Householder QR of a square or tall matrix: `A = Q R`, `Q` unitary
/// (`rows x rows`), `R` upper triangular (`rows x cols`).
pub fn householder_qr(a: &CMat) -> (CMat, CMat) {
    let (m, n) = (a.rows, a.cols);
    let mut r = a.clone();
    let mut q = CMat::identity(m);
    for k in 0..n.min(m.saturating_sub(1)) {
        let norm_x = math::sqrt((k..m).map(|i| r[(i, k)].norm_sqr()).sum::<f64>());
        if norm_x == 0.0 {
            continue;
        }
        let x0 = r[(k, k)];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let alpha = -phase * norm_x;
        let mut v: Vec<C64> = (k..m).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm = math::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>());
        if vnorm == 0.0 {
            continue;
        }
        for z in &mut v {
            *z /= vnorm;
        }
        // R <- (I - 2 v vᴴ) R on rows k..m
        for j in 0..n {
            let dot: C64 = (k..m).map(|i| v[i - k].conj() * r[(i, j)]).sum();
            for i in k..m {
                r[(i, j)] -= v[i - k] * dot * 2.0;
            }
        }
        // Q <- Q (I - 2 v vᴴ) on columns k..m
        for i in 0..m {
            let dot: C64 = (k..m).map(|p| q[(i, p)] * v[p - k]).sum();
            for p in k..m {
                q[(i, p)] -= dot * v[p - k].conj() * 2.0;
            }
        }
    }
    (q, r)
}
