//! Seeded random streams and the three samplers the analysis is built on.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::invalid;
use crate::linalg::{householder_qr, CMat, C64};
use crate::math;
use crate::Result;

/// Identifies an independent, reproducible random stream.
///
/// Monte-Carlo trial `t` of a run seeded with `s` always uses
/// `RngStream::new(s, t)`, so results never depend on how trials are
/// scheduled across threads.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// One circularly-symmetric complex Gaussian draw with `E|z|² = variance`.
#[inline]
pub fn complex_gaussian<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> C64 {
    let s = math::sqrt(variance / 2.0);
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * s, im * s)
}

/// `rows x cols` matrix of i.i.d. `CN(0, variance)` entries.
pub fn sample_complex_gaussian<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    variance: f64,
    rng: &mut R,
) -> Result<CMat> {
    if !(variance.is_finite() && variance > 0.0) {
        return Err(invalid!(
            "variance must be finite and positive, got {variance}"
        ));
    }
    Ok(CMat::from_fn(rows, cols, |_, _| {
        complex_gaussian(variance, rng)
    }))
}

/// Haar-distributed `n x n` unitary matrix.
///
/// QR of a complex Gaussian matrix, with column `j` of `Q` multiplied by the
/// phase of `R_jj` so that the factorization is unique and the result is
/// exactly Haar.
pub fn sample_haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CMat> {
    if n == 0 {
        return Err(invalid!("unitary dimension must be at least 1"));
    }
    let g = sample_complex_gaussian(n, n, 1.0, rng)?;
    let (mut q, r) = householder_qr(&g);
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    Ok(q)
}

/// A vector uniform on the complex sphere of squared radius `2^sum_cap_bits - 1`,
/// i.e. a channel conditioned on its sum capacity (Frobenius capacity in
/// the vectorized MIMO case).
pub fn sample_sphere_conditioned<R: Rng + ?Sized>(
    dim: usize,
    sum_cap_bits: f64,
    rng: &mut R,
) -> Result<Vec<C64>> {
    if dim == 0 {
        return Err(invalid!("sphere dimension must be at least 1"));
    }
    if !(sum_cap_bits.is_finite() && sum_cap_bits >= 0.0) {
        return Err(invalid!(
            "sum capacity must be finite and non-negative, got {sum_cap_bits}"
        ));
    }
    let radius = math::sqrt(math::exp2_m1(sum_cap_bits));
    let mut v: Vec<C64> = (0..dim).map(|_| complex_gaussian(1.0, rng)).collect();
    let norm = math::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>());
    if norm == 0.0 {
        // measure-zero event; fall back to the first axis
        v[0] = C64::new(1.0, 0.0);
        for z in v.iter_mut().skip(1) {
            *z = C64::new(0.0, 0.0);
        }
        return Ok(v.into_iter().map(|z| z * radius).collect());
    }
    Ok(v.into_iter().map(|z| z * (radius / norm)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ks_uniform(mut xs: Vec<f64>) -> f64 {
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let lo = (x - i as f64 / n).abs();
                let hi = ((i + 1) as f64 / n - x).abs();
                lo.max(hi)
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn gaussian_scalar_variance() {
        let mut rng = RngStream::new(1, 0).rng();
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_complex_gaussian(1, 1, 1.0, &mut rng).unwrap()[(0, 0)].norm_sqr())
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        // |z|² ~ Exp(1): sd 1
        assert!((mean - 1.0).abs() < 3.0 / (n as f64).sqrt(), "{mean}");
    }

    #[test]
    fn gaussian_frobenius_mean() {
        let mut rng = RngStream::new(2, 0).rng();
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| {
                sample_complex_gaussian(2, 2, 4.0, &mut rng)
                    .unwrap()
                    .frobenius_norm_sqr()
            })
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        // sum of 4 Exp(mean 4): sd = 8
        assert!(
            (mean - 16.0).abs() < 3.0 * 8.0 / (n as f64).sqrt(),
            "{mean}"
        );
    }

    #[test]
    fn gaussian_rejects_bad_variance() {
        let mut rng = RngStream::new(0, 0).rng();
        assert!(sample_complex_gaussian(1, 1, 0.0, &mut rng).is_err());
        assert!(sample_complex_gaussian(1, 1, -1.0, &mut rng).is_err());
        assert!(sample_complex_gaussian(1, 1, f64::NAN, &mut rng).is_err());
    }

    #[test]
    fn same_stream_same_draws() {
        let a = sample_complex_gaussian(3, 3, 1.0, &mut RngStream::new(9, 4).rng()).unwrap();
        let b = sample_complex_gaussian(3, 3, 1.0, &mut RngStream::new(9, 4).rng()).unwrap();
        let c = sample_complex_gaussian(3, 3, 1.0, &mut RngStream::new(9, 5).rng()).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn haar_small_cases() {
        let mut rng = RngStream::new(3, 0).rng();
        let u = sample_haar_unitary(1, &mut rng).unwrap();
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-14);
        let u = sample_haar_unitary(4, &mut rng).unwrap();
        for i in 0..4 {
            let norm: f64 = u.row(i).iter().map(|z| z.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
        assert!((&u * &u.adjoint()).max_abs_diff(&CMat::identity(4)) < 1e-12);
        assert!(sample_haar_unitary(0, &mut rng).is_err());
    }

    #[test]
    fn haar_2x2_corner_is_uniform() {
        let mut rng = RngStream::new(4, 0).rng();
        let xs: Vec<f64> = (0..100_000)
            .map(|_| sample_haar_unitary(2, &mut rng).unwrap()[(0, 0)].norm_sqr())
            .collect();
        let ks = ks_uniform(xs);
        assert!(ks < 0.01, "KS = {ks}");
    }

    #[test]
    fn haar_left_invariance() {
        // V·U must have the same law as U: push |(VU)_{2,3}|² through the Haar
        // marginal CDF and compare with Unif([0,1]).
        let mut rng = RngStream::new(5, 0).rng();
        let v = sample_haar_unitary(3, &mut rng).unwrap();
        let xs: Vec<f64> = (0..100_000)
            .map(|_| {
                let u = sample_haar_unitary(3, &mut rng).unwrap();
                // |entry|² of a 3x3 Haar matrix ~ Beta(1, 2), CDF 1 - (1-x)²
                let w = &v * &u;
                1.0 - (1.0 - w[(1, 2)].norm_sqr()).powi(2)
            })
            .collect();
        let ks = ks_uniform(xs);
        assert!(ks < 0.02, "KS = {ks}");
    }

    #[test]
    fn sphere_radius_exact() {
        let mut rng = RngStream::new(6, 0).rng();
        let h = sample_sphere_conditioned(2, 2.0, &mut rng).unwrap();
        let r2: f64 = h.iter().map(|z| z.norm_sqr()).sum();
        assert!((r2 - 3.0).abs() < 1e-12 * 3.0);
        for c in [0.5, 3.0, 7.25] {
            let h = sample_sphere_conditioned(1, c, &mut rng).unwrap();
            let expected = 2f64.powf(c) - 1.0;
            assert!((h[0].norm_sqr() - expected).abs() < 1e-12 * expected);
        }
    }

    #[test]
    fn sphere_rejects_bad_input() {
        let mut rng = RngStream::new(0, 0).rng();
        assert!(sample_sphere_conditioned(0, 1.0, &mut rng).is_err());
        assert!(sample_sphere_conditioned(2, -0.1, &mut rng).is_err());
    }

    #[test]
    fn sphere_first_coordinate_uniform() {
        let mut rng = RngStream::new(7, 0).rng();
        let xs: Vec<f64> = (0..100_000)
            .map(|_| sample_sphere_conditioned(2, 2.0, &mut rng).unwrap()[0].norm_sqr() / 3.0)
            .collect();
        let ks = ks_uniform(xs);
        assert!(ks < 0.01, "KS = {ks}");
    }

    #[test]
    fn sphere_partial_sums_follow_beta() {
        // partial sum of k of N squared coordinates ~ Beta(k, N-k); with N = 4,
        // k = 1: CDF 1 - (1-x)³, k = 2: 3x² - 2x³, k = 3: x³.
        let cdfs: [fn(f64) -> f64; 3] = [
            |x| 1.0 - (1.0 - x).powi(3),
            |x| 3.0 * x * x - 2.0 * x * x * x,
            |x| x * x * x,
        ];
        for (k, cdf) in (1..4).zip(cdfs) {
            let mut rng = RngStream::new(8, k as u64).rng();
            let xs: Vec<f64> = (0..100_000)
                .map(|_| {
                    let h = sample_sphere_conditioned(4, 5.0, &mut rng).unwrap();
                    let total: f64 = h.iter().map(|z| z.norm_sqr()).sum();
                    let part: f64 = h[..k].iter().map(|z| z.norm_sqr()).sum();
                    cdf(part / total)
                })
                .collect();
            let ks = ks_uniform(xs);
            assert!(ks < 0.02, "k = {k}: KS = {ks}");
        }
    }
}
