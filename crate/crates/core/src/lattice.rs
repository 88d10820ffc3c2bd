//! Integer-matrix search for integer forcing.
//!
//! Given a lattice generator `G` with `K = GᴴG`, find a full-rank
//! Gaussian-integer matrix `A` whose rows `a_m` keep the quadratic forms
//! `a_mᴴ K a_m = ‖G a_m‖²` small. The complex lattice is handled through the
//! real embedding `a ↦ [Re a; Im a]`, `G ↦ [[Re G, -Im G], [Im G, Re G]]`,
//! which preserves lengths.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{domain, invalid};
use crate::linalg::{cholesky_lower, CMat, C64};
use crate::math;
use crate::Result;

/// A candidate row with its quadratic form.
type Candidate = (f64, Vec<(i64, i64)>);

/// Lovász parameter of the reduction.
pub const LLL_DELTA: f64 = 0.75;

/// Largest complex dimension accepted by [`brute_force_search`].
pub const MAX_BRUTE_FORCE_DIM: usize = 4;

/// Gaussian-integer lattice `{G a : a ∈ Z[i]^n}` of a square generator `G`.
///
/// Lengths are computed as `‖G a‖²` rather than `aᴴ K a`, which stays
/// accurate for rows with large entries when `K = GᴴG` is badly conditioned.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    g: CMat,
}

impl Lattice {
    pub fn from_generator(g: CMat) -> Result<Self> {
        if !g.is_square() || g.rows() == 0 {
            return Err(invalid!("lattice generator must be square and non-empty"));
        }
        if !g.is_finite() {
            return Err(domain!("lattice generator has non-finite entries"));
        }
        Ok(Self { g })
    }

    /// Lattice with Gram matrix `K` (Hermitian positive definite), generated
    /// by `Lᴴ` for the Cholesky factor `K = L Lᴴ`.
    pub fn from_gram(k: &CMat) -> Result<Self> {
        if !k.is_square() || k.rows() == 0 {
            return Err(invalid!("Gram matrix must be square and non-empty"));
        }
        Self::from_generator(cholesky_lower(k)?.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.g.rows()
    }

    pub fn generator(&self) -> &CMat {
        &self.g
    }

    /// `K = GᴴG`.
    pub fn gram(&self) -> CMat {
        self.g.gram()
    }

    /// `G a`.
    pub fn image(&self, a: &[C64]) -> Vec<C64> {
        (0..self.dim())
            .map(|i| self.g.row(i).iter().zip(a).map(|(g, x)| g * x).sum())
            .collect()
    }

    /// `‖G a‖² = aᴴ K a`.
    pub fn form(&self, a: &[C64]) -> f64 {
        self.image(a).iter().map(|z| z.norm_sqr()).sum()
    }

    fn int_form(&self, a: &[(i64, i64)]) -> f64 {
        self.form(&to_complex(a))
    }

    /// Basis of the real-embedded lattice: vector `c < n` is the image of
    /// `e_c`, vector `n + c` the image of `i·e_c`, each as `[Re; Im]`.
    fn real_basis(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut basis = Vec::with_capacity(2 * n);
        for c in 0..n {
            let col = self.g.column(c);
            basis.push(
                col.iter()
                    .map(|z| z.re)
                    .chain(col.iter().map(|z| z.im))
                    .collect(),
            );
        }
        for c in 0..n {
            let col = self.g.column(c);
            basis.push(
                col.iter()
                    .map(|z| -z.im)
                    .chain(col.iter().map(|z| z.re))
                    .collect(),
            );
        }
        basis
    }
}

/// Square matrix over the Gaussian integers `Z[i]`, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaussianIntMatrix {
    n: usize,
    /// `(re, im)` pairs.
    data: Vec<(i64, i64)>,
}

impl GaussianIntMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![(0, 0); n * n];
        for i in 0..n {
            data[i * n + i] = (1, 0);
        }
        Self { n, data }
    }

    pub fn from_rows(rows: Vec<Vec<(i64, i64)>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(invalid!("integer matrix must be square"));
        }
        Ok(Self {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[(i64, i64)] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn row_complex(&self, i: usize) -> Vec<C64> {
        self.row(i)
            .iter()
            .map(|&(re, im)| C64::new(re as f64, im as f64))
            .collect()
    }

    pub fn to_complex(&self) -> CMat {
        CMat::from_fn(self.n, self.n, |i, j| {
            let (re, im) = self.data[i * self.n + j];
            C64::new(re as f64, im as f64)
        })
    }

    /// Rows reordered so that row `i` of the result is row `perm[i]`.
    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for &p in perm {
            data.extend_from_slice(self.row(p));
        }
        Self { n: self.n, data }
    }

    /// Full rank over `C` (equivalently over `Q(i)`). Exact unless the
    /// elimination overflows `i128`, in which case a floating-point test is
    /// used.
    pub fn is_full_rank(&self) -> bool {
        self.exact_full_rank().unwrap_or_else(|| {
            let mut basis = IndependenceTracker::new(self.n);
            (0..self.n).all(|i| basis.try_insert(&self.row_complex(i)))
        })
    }

    /// Fraction-free (Bareiss) elimination over `Z[i]`; `None` on overflow.
    fn exact_full_rank(&self) -> Option<bool> {
        let n = self.n;
        let mut m: Vec<Vec<Gi>> = (0..n)
            .map(|i| {
                self.row(i)
                    .iter()
                    .map(|&(re, im)| (re as i128, im as i128))
                    .collect()
            })
            .collect();
        let mut prev: Gi = (1, 0);
        for k in 0..n {
            let Some(p) = (k..n).find(|&i| m[i][k] != (0, 0)) else {
                return Some(false);
            };
            m.swap(k, p);
            for i in k + 1..n {
                for j in k + 1..n {
                    let t = gi_sub(gi_mul(m[i][j], m[k][k])?, gi_mul(m[i][k], m[k][j])?)?;
                    m[i][j] = gi_div_exact(t, prev)?;
                }
                m[i][k] = (0, 0);
            }
            prev = m[k][k];
        }
        Some(true)
    }

    /// Quadratic forms `a_mᴴ K a_m` of every row.
    pub fn row_forms(&self, lattice: &Lattice) -> Vec<f64> {
        (0..self.n).map(|i| lattice.int_form(self.row(i))).collect()
    }

    /// Largest row quadratic form.
    pub fn max_form(&self, lattice: &Lattice) -> f64 {
        self.row_forms(lattice).into_iter().fold(0.0, f64::max)
    }
}

type Gi = (i128, i128);

fn gi_mul(a: Gi, b: Gi) -> Option<Gi> {
    let re = a.0.checked_mul(b.0)?.checked_sub(a.1.checked_mul(b.1)?)?;
    let im = a.0.checked_mul(b.1)?.checked_add(a.1.checked_mul(b.0)?)?;
    Some((re, im))
}

fn gi_sub(a: Gi, b: Gi) -> Option<Gi> {
    Some((a.0.checked_sub(b.0)?, a.1.checked_sub(b.1)?))
}

/// `a / b` for a division known to be exact in `Z[i]`.
fn gi_div_exact(a: Gi, b: Gi) -> Option<Gi> {
    let num = gi_mul(a, (b.0, -b.1))?;
    let den = b.0.checked_mul(b.0)?.checked_add(b.1.checked_mul(b.1)?)?;
    Some((num.0 / den, num.1 / den))
}

/// Incremental linear-independence test over `C` via Gram-Schmidt.
struct IndependenceTracker {
    dim: usize,
    ortho: Vec<Vec<C64>>,
}

impl IndependenceTracker {
    fn new(dim: usize) -> Self {
        Self {
            dim,
            ortho: Vec::new(),
        }
    }

    fn is_complete(&self) -> bool {
        self.ortho.len() == self.dim
    }

    fn try_insert(&mut self, v: &[C64]) -> bool {
        let norm0: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if norm0 == 0.0 {
            return false;
        }
        let mut r = v.to_vec();
        // two passes of classical Gram-Schmidt for stability
        for _ in 0..2 {
            for q in &self.ortho {
                let dot: C64 = q.iter().zip(&r).map(|(a, b)| a.conj() * b).sum();
                for (ri, qi) in r.iter_mut().zip(q) {
                    *ri -= dot * qi;
                }
            }
        }
        let rn: f64 = r.iter().map(|z| z.norm_sqr()).sum();
        if rn <= 1e-9 * norm0 {
            return false;
        }
        let s = 1.0 / math::sqrt(rn);
        self.ortho.push(r.into_iter().map(|z| z * s).collect());
        true
    }
}

fn lift(coeffs: &[i64], n: usize) -> Vec<(i64, i64)> {
    (0..n).map(|i| (coeffs[i], coeffs[n + i])).collect()
}

fn to_complex(v: &[(i64, i64)]) -> Vec<C64> {
    v.iter()
        .map(|&(re, im)| C64::new(re as f64, im as f64))
        .collect()
}

/// Picks `n` linearly independent candidates with the smallest quadratic
/// forms. On the linear matroid this greedy choice minimizes the largest
/// selected form over all bases drawn from `candidates`.
///
/// Independence is tested on the images `G a` (independent exactly when the
/// rows are, as `G` is invertible): short rows with large entries are nearly
/// parallel as integer vectors but well separated in the lattice.
fn greedy_basis(lattice: &Lattice, mut candidates: Vec<Candidate>) -> Option<GaussianIntMatrix> {
    let n = lattice.dim();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut tracker = IndependenceTracker::new(n);
    let mut rows = Vec::with_capacity(n);
    for (_, v) in candidates {
        if tracker.try_insert(&lattice.image(&to_complex(&v))) {
            rows.push(v);
            if tracker.is_complete() {
                return GaussianIntMatrix::from_rows(rows).ok();
            }
        }
    }
    None
}

/// LLL reduction of the lattice with Gram matrix `gram` (row-major `m x m`,
/// symmetric positive definite). Returns the unimodular transform as a list
/// of integer coefficient vectors, one per reduced basis vector.
pub fn lll_reduce_gram(gram: &[f64], m: usize, delta: f64) -> Result<Vec<Vec<i64>>> {
    if gram.len() != m * m {
        return Err(invalid!(
            "Gram matrix has {} entries, expected {}",
            gram.len(),
            m * m
        ));
    }
    let l = cholesky_lower(&CMat::from_fn(m, m, |i, j| C64::new(gram[i * m + j], 0.0)))?;
    // row j of L has inner products gram[j][·] with the other rows
    let basis: Vec<Vec<f64>> = (0..m)
        .map(|j| (0..m).map(|c| l[(j, c)].re).collect())
        .collect();
    lll_reduce(basis, delta)
}

/// LLL reduction of the real lattice spanned by `basis` (linearly
/// independent vectors of equal length). Returns, for each reduced vector,
/// its integer coefficients over the input basis.
///
/// Vectors are updated in place, so rounding error scales with the current
/// basis rather than with the accumulated integer coefficients.
pub fn lll_reduce(mut basis: Vec<Vec<f64>>, delta: f64) -> Result<Vec<Vec<i64>>> {
    let m = basis.len();
    if basis.iter().any(|b| b.len() != basis[0].len()) {
        return Err(invalid!("basis vectors must have equal length"));
    }
    if !(delta > 0.25 && delta <= 1.0) {
        return Err(invalid!(
            "Lovász parameter must lie in (1/4, 1], got {delta}"
        ));
    }
    let mut coeffs: Vec<Vec<i64>> = (0..m)
        .map(|j| {
            let mut e = vec![0i64; m];
            e[j] = 1;
            e
        })
        .collect();

    let mut k = 1;
    let mut guard = 0usize;
    while k < m {
        guard += 1;
        if guard > 100_000 {
            return Err(domain!("LLL did not converge"));
        }
        // size reduction of b_k against b_{k-1}, …, b_0
        let (mut mu, bstar) = gso(&basis, k + 1);
        for j in (0..k).rev() {
            let q = math::round(mu[k][j]);
            if q != 0.0 {
                let (head, tail) = mu.split_at_mut(k);
                for (x, y) in tail[0][..=j].iter_mut().zip(&head[j][..=j]) {
                    *x -= q * y;
                }
                let (head, tail) = basis.split_at_mut(k);
                for (x, y) in tail[0].iter_mut().zip(&head[j]) {
                    *x -= q * y;
                }
                let q = q as i64;
                let (head, tail) = coeffs.split_at_mut(k);
                for (c, b) in tail[0].iter_mut().zip(&head[j]) {
                    *c -= q * b;
                }
            }
        }
        if !(bstar[k] > 0.0) {
            return Err(domain!("lattice basis became degenerate during LLL"));
        }
        if bstar[k] < (delta - mu[k][k - 1] * mu[k][k - 1]) * bstar[k - 1] {
            basis.swap(k, k - 1);
            coeffs.swap(k, k - 1);
            k = if k > 1 { k - 1 } else { 1 };
        } else {
            k += 1;
        }
    }
    Ok(coeffs)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gram-Schmidt coefficients `μ` and squared lengths `‖b*_i‖²` of the first
/// `upto` basis vectors (modified Gram-Schmidt).
fn gso(basis: &[Vec<f64>], upto: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut mu = vec![vec![0.0; upto]; upto];
    let mut bstar = vec![0.0; upto];
    let mut ortho: Vec<Vec<f64>> = Vec::with_capacity(upto);
    for i in 0..upto {
        let mut v = basis[i].clone();
        for j in 0..i {
            let c = dot(&v, &ortho[j]) / bstar[j];
            mu[i][j] = c;
            for (x, y) in v.iter_mut().zip(&ortho[j]) {
                *x -= c * y;
            }
        }
        mu[i][i] = 1.0;
        bstar[i] = dot(&v, &v);
        ortho.push(v);
    }
    (mu, bstar)
}

/// Integer matrix from LLL reduction of the real-embedded lattice.
///
/// The reduced vectors are lifted back to `Z[i]^n` and, together with the
/// unit vectors, fed to a greedy smallest-form basis selection, so the result
/// is always full rank and its worst row is never worse than the identity's.
pub fn lll_search(lattice: &Lattice) -> Result<GaussianIntMatrix> {
    let n = lattice.dim();
    let reduced = lll_reduce(lattice.real_basis(), LLL_DELTA)?;
    let mut candidates: Vec<Candidate> = reduced
        .iter()
        .map(|c| {
            let v = lift(c, n);
            (lattice.int_form(&v), v)
        })
        .collect();
    for i in 0..n {
        let mut e = vec![(0, 0); n];
        e[i] = (1, 0);
        candidates.push((lattice.int_form(&e), e));
    }
    greedy_basis(lattice, candidates)
        .ok_or_else(|| domain!("could not assemble a full-rank integer matrix"))
}

/// Exhaustive search over Gaussian-integer rows with every real and
/// imaginary part in `[-radius, radius]`.
///
/// Only rows whose form does not exceed the identity's worst row can appear
/// in an optimal basis, so the box is walked with a Fincke-Pohst style
/// depth-first enumeration pruned at that level; the result equals that of a
/// full `(2·radius+1)^{2n}` scan.
pub fn brute_force_search(lattice: &Lattice, radius: i64) -> Result<GaussianIntMatrix> {
    let n = lattice.dim();
    if n > MAX_BRUTE_FORCE_DIM {
        return Err(invalid!(
            "exhaustive search is limited to dimension {MAX_BRUTE_FORCE_DIM}, got {n}"
        ));
    }
    if radius < 1 {
        return Err(invalid!("search radius must be at least 1, got {radius}"));
    }
    let limit = GaussianIntMatrix::identity(n).max_form(lattice) * (1.0 + 1e-9);
    let candidates = enumerate_short_vectors(lattice, radius, limit)?;
    greedy_basis(lattice, candidates)
        .ok_or_else(|| domain!("exhaustive search found no full-rank matrix"))
}

/// All non-zero box-limited vectors with form at most `limit`.
fn enumerate_short_vectors(lattice: &Lattice, radius: i64, limit: f64) -> Result<Vec<Candidate>> {
    let n = lattice.dim();
    let m = 2 * n;
    let basis = lattice.real_basis();
    let mut g = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            g[i * m + j] = dot(&basis[i], &basis[j]);
        }
    }
    // upper-triangular R with G = Rᵀ R, from a real Cholesky of G
    let mut l = vec![0.0; m * m];
    for j in 0..m {
        let mut d = g[j * m + j];
        for p in 0..j {
            d -= l[j * m + p] * l[j * m + p];
        }
        if !(d > 0.0) {
            return Err(domain!("Gram matrix is not positive definite"));
        }
        let djj = math::sqrt(d);
        l[j * m + j] = djj;
        for i in j + 1..m {
            let mut s = g[i * m + j];
            for p in 0..j {
                s -= l[i * m + p] * l[j * m + p];
            }
            l[i * m + j] = s / djj;
        }
    }
    // r[i][j] = l[j][i]
    let r = |i: usize, j: usize| l[j * m + i];

    let mut out = Vec::new();
    let mut x = vec![0i64; m];
    // depth-first from the last coordinate, pruning on the partial form
    #[allow(clippy::too_many_arguments)]
    fn walk(
        level: usize,
        m: usize,
        radius: i64,
        limit: f64,
        acc: f64,
        x: &mut Vec<i64>,
        r: &dyn Fn(usize, usize) -> f64,
        out: &mut Vec<Vec<i64>>,
    ) {
        let rii = r(level, level);
        let offset: f64 = (level + 1..m).map(|j| r(level, j) * x[j] as f64).sum();
        // (rii·x_i + offset)² <= limit - acc
        let room = limit - acc;
        if room < 0.0 {
            return;
        }
        let span = math::sqrt(room) / rii;
        let centre = -offset / rii;
        let lo = (math::floor(centre - span) as i64).max(-radius);
        let hi = (math::floor(centre + span) as i64 + 1).min(radius);
        for xi in lo..=hi {
            let t = rii * xi as f64 + offset;
            let next = acc + t * t;
            if next > limit {
                continue;
            }
            x[level] = xi;
            if level == 0 {
                if x.iter().any(|&v| v != 0) {
                    out.push(x.clone());
                }
            } else {
                walk(level - 1, m, radius, limit, next, x, r, out);
            }
        }
        x[level] = 0;
    }
    let mut raw = Vec::new();
    walk(m - 1, m, radius, limit, 0.0, &mut x, &r, &mut raw);
    for c in raw {
        let v = lift(&c, n);
        out.push((lattice.int_form(&v), v));
    }
    Ok(out)
}
