//! Monte-Carlo estimation of outage probabilities.
//!
//! Trial `t` of a run with seed `s` always draws from `RngStream::new(s, t)`
//! and per-trial results are collected in trial order, so every estimate is
//! bit-identical whether or not the `parallel` feature is enabled and
//! regardless of the number of worker threads.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;

use crate::bounds::{mimo_union_bound, two_user_simo_bound, ScenarioDims};
use crate::error::invalid;
use crate::mac::{frobenius_sum, sum_capacity, symmetric_capacity, MacChannel};
use crate::math;
use crate::sampling::{sample_sphere_conditioned, RngStream};
use crate::Result;

/// How a target rate is compared with the symmetric capacity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum RateConvention {
    /// Outage iff `C_sym < R`.
    #[default]
    Total,
    /// `R` is a per-user rate: outage iff `C_sym < N·R`.
    PerUser,
}

impl RateConvention {
    /// Threshold on the total symmetric rate for a target `rate`.
    pub fn threshold(self, rate: f64, users: usize) -> f64 {
        match self {
            RateConvention::Total => rate,
            RateConvention::PerUser => rate * users as f64,
        }
    }
}

/// Trial count, seed and evaluation grids of a simulation.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub trials: usize,
    pub seed: u64,
    /// Target rates (bits per channel use), ascending.
    pub rate_grid: Vec<f64>,
    /// SNR points in dB, ascending; only used by the SNR sweeps.
    pub snr_grid_db: Vec<f64>,
    pub rate_convention: RateConvention,
}

impl SimConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            rate_grid: Vec::new(),
            snr_grid_db: Vec::new(),
            rate_convention: RateConvention::Total,
        }
    }

    pub fn with_rate_grid(mut self, grid: Vec<f64>) -> Self {
        self.rate_grid = grid;
        self
    }

    pub fn with_snr_grid_db(mut self, grid: Vec<f64>) -> Self {
        self.snr_grid_db = grid;
        self
    }

    pub fn with_rate_convention(mut self, convention: RateConvention) -> Self {
        self.rate_convention = convention;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid!("trial count must be at least 1"));
        }
        check_grid("rate grid", &self.rate_grid)?;
        check_grid("SNR grid", &self.snr_grid_db)?;
        if self.rate_grid.iter().any(|&r| r < 0.0) {
            return Err(invalid!("rates must be non-negative"));
        }
        Ok(())
    }
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(invalid!("{name} contains a non-finite value"));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid!("{name} must be sorted ascending"));
    }
    Ok(())
}

/// Empirical probability at one grid point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutageEstimate {
    /// Rate or SNR (dB) the estimate belongs to.
    pub point: f64,
    pub p_hat: f64,
    /// Binomial standard error `√(p̂(1-p̂)/n)`.
    pub stderr: f64,
    pub trials: usize,
}

impl OutageEstimate {
    pub fn from_count(point: f64, hits: usize, trials: usize) -> Self {
        let n = trials as f64;
        let p_hat = hits as f64 / n;
        Self {
            point,
            p_hat,
            stderr: math::sqrt(p_hat * (1.0 - p_hat) / n),
            trials,
        }
    }
}

/// Empirical CDF over a rate grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CdfCurve {
    pub points: Vec<OutageEstimate>,
    /// Empirical `P(stat = C)`, the mass sitting exactly at the conditioning
    /// capacity; `point` holds `C`.
    pub atom: OutageEstimate,
}

/// Monte-Carlo average of a bounded per-trial quantity at one grid point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanEstimate {
    pub point: f64,
    pub mean: f64,
    /// Sample standard deviation over `√n`.
    pub stderr: f64,
    pub trials: usize,
}

impl MeanEstimate {
    pub fn from_samples(point: f64, samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = if samples.len() > 1 {
            samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            point,
            mean,
            stderr: math::sqrt(var / n),
            trials: samples.len(),
        }
    }
}

/// Runs `trial(rng, t)` for `t = 0..trials`, each on its own stream, and
/// returns the results in trial order.
pub fn run_trials<T, F>(trials: usize, seed: u64, trial: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> Result<T> + Sync,
{
    let one = |t: u64| trial(&mut RngStream::new(seed, t).rng(), t);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..trials as u64).into_par_iter().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..trials as u64).map(one).collect()
    }
}

/// `#{s < threshold} / n` at every threshold, from one sorted pass.
pub fn empirical_cdf(samples: &[f64], grid: &[f64], thresholds: &[f64]) -> Vec<OutageEstimate> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    grid.iter()
        .zip(thresholds)
        .map(|(&point, &thr)| {
            let hits = sorted.partition_point(|&s| s < thr);
            OutageEstimate::from_count(point, hits, sorted.len())
        })
        .collect()
}

/// Empirical CDF plus atom mass of per-trial statistics that never exceed
/// `cap` and equal it on the atom.
pub fn conditional_curve(samples: &[f64], cap: f64, users: usize, cfg: &SimConfig) -> CdfCurve {
    let thresholds: Vec<f64> = cfg
        .rate_grid
        .iter()
        .map(|&r| cfg.rate_convention.threshold(r, users))
        .collect();
    let points = empirical_cdf(samples, &cfg.rate_grid, &thresholds);
    let at_cap = samples.iter().filter(|&&s| s >= cap).count();
    CdfCurve {
        points,
        atom: OutageEstimate::from_count(cap, at_cap, samples.len()),
    }
}

/// `min(cap, min_{k<N} (N/k) log₂(1 + e_(1) + … + e_(k)))` with `e_(i)` the
/// per-user energies in increasing order. Using `cap` for the full set keeps
/// the atom exact despite rounding in the partial sums.
fn symmetric_from_energies(energies: &mut [f64], cap: f64) -> f64 {
    energies.sort_by(f64::total_cmp);
    let n = energies.len();
    let mut prefix = 0.0;
    let mut best = cap;
    for (k, e) in energies.iter().take(n - 1).enumerate() {
        prefix += e;
        best = best.min(n as f64 / (k + 1) as f64 * math::log2_1p(prefix));
    }
    best
}

fn check_cap(cap: f64) -> Result<()> {
    if !(cap.is_finite() && cap > 0.0) {
        return Err(invalid!(
            "conditioning capacity must be positive and finite, got {cap}"
        ));
    }
    Ok(())
}

/// Per-trial `C_sym` of a scalar `N`-user channel conditioned on sum
/// capacity `cap` (gains uniform on the complex sphere).
pub fn conditioned_symmetric_samples(users: usize, cap: f64, cfg: &SimConfig) -> Result<Vec<f64>> {
    conditioned_frobenius_samples(ScenarioDims::scalar(users)?, cap, cfg)
}

/// Per-trial Frobenius symmetric rate `min_S (N/|S|) C̃(S)` of a MIMO-MAC
/// conditioned on `C̃ = cap`.
pub fn conditioned_frobenius_samples(
    dims: ScenarioDims,
    cap: f64,
    cfg: &SimConfig,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    check_cap(cap)?;
    let per = dims.tx * dims.rx;
    run_trials(cfg.trials, cfg.seed, |rng, _| {
        let v = sample_sphere_conditioned(dims.channel_dim(), cap, rng)?;
        let mut energies: Vec<f64> = v
            .chunks(per)
            .map(|c| c.iter().map(|z| z.norm_sqr()).sum())
            .collect();
        Ok(symmetric_from_energies(&mut energies, cap))
    })
}

/// Empirical `P(C_sym < R | C)` for the scalar `N`-user MAC.
pub fn conditional_cdf_scalar(users: usize, cap: f64, cfg: &SimConfig) -> Result<CdfCurve> {
    let samples = conditioned_symmetric_samples(users, cap, cfg)?;
    Ok(conditional_curve(&samples, cap, users, cfg))
}

/// Empirical `P(C̃_sym < R | C̃)` for a MIMO-MAC, with the vectorized channel
/// uniform on the complex sphere of dimension `N·N_t·N_r`.
pub fn conditional_cdf_mimo_frobenius(
    dims: ScenarioDims,
    cap: f64,
    cfg: &SimConfig,
) -> Result<CdfCurve> {
    let samples = conditioned_frobenius_samples(dims, cap, cfg)?;
    Ok(conditional_curve(&samples, cap, dims.users, cfg))
}

/// Empirical `P((N/k)·C̃(S) < R | C̃)` for the fixed subset `S` of the first
/// `k` users; the scalar case is `N_t = N_r = 1`.
pub fn conditional_subset_cdf(
    dims: ScenarioDims,
    k: usize,
    cap: f64,
    cfg: &SimConfig,
) -> Result<Vec<OutageEstimate>> {
    cfg.validate()?;
    check_cap(cap)?;
    if k == 0 || k > dims.users {
        return Err(invalid!(
            "subset size must lie in 1..={}, got {k}",
            dims.users
        ));
    }
    let coords = k * dims.tx * dims.rx;
    let scale = dims.users as f64 / k as f64;
    let samples = run_trials(cfg.trials, cfg.seed, |rng, _| {
        let v = sample_sphere_conditioned(dims.channel_dim(), cap, rng)?;
        if k == dims.users {
            return Ok(cap);
        }
        let part: f64 = v[..coords].iter().map(|z| z.norm_sqr()).sum();
        Ok(scale * math::log2_1p(part))
    })?;
    let thresholds: Vec<f64> = cfg
        .rate_grid
        .iter()
        .map(|&r| cfg.rate_convention.threshold(r, dims.users))
        .collect();
    Ok(empirical_cdf(&samples, &cfg.rate_grid, &thresholds))
}

/// Which analytic bound to average over channel draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundKind {
    /// Union bound conditioned on the Frobenius capacity `C̃` of each draw.
    FrobeniusUnion,
    /// Two-user SIMO bound conditioned on the sum capacity `C` of each draw.
    TwoUserSimo,
}

fn check_bound_dims(dims: ScenarioDims, which: BoundKind) -> Result<()> {
    if which == BoundKind::TwoUserSimo && !(dims.users == 2 && dims.tx == 1) {
        return Err(invalid!(
            "the two-user SIMO bound needs N = 2 and N_t = 1, got N = {}, N_t = {}",
            dims.users,
            dims.tx
        ));
    }
    Ok(())
}

/// The bound for one realization. A target above the conditioning capacity
/// is an outage with certainty, so the bound is 1 there.
pub fn realization_bound(
    ch: &MacChannel,
    dims: ScenarioDims,
    threshold: f64,
    which: BoundKind,
) -> Result<f64> {
    match which {
        BoundKind::FrobeniusUnion => {
            let cap = frobenius_sum(ch);
            if threshold > cap {
                Ok(1.0)
            } else {
                mimo_union_bound(dims, threshold, cap)
            }
        }
        BoundKind::TwoUserSimo => {
            let cap = sum_capacity(ch);
            if threshold > cap {
                Ok(1.0)
            } else {
                two_user_simo_bound(threshold, cap)
            }
        }
    }
}

/// Draw for trial `rng`: unit-variance Rayleigh channel, later scaled by
/// `√snr` so that every SNR point sees the same realizations.
fn unit_channel(dims: ScenarioDims, rng: &mut ChaCha8Rng) -> Result<MacChannel> {
    MacChannel::sample_rayleigh(dims.users, dims.rx, dims.tx, 1.0, rng)
}

fn snr_linear(db: f64) -> f64 {
    math::pow(10.0, db / 10.0)
}

fn check_snr_grid(cfg: &SimConfig) -> Result<()> {
    cfg.validate()?;
    if cfg.snr_grid_db.is_empty() {
        return Err(invalid!("SNR grid must not be empty"));
    }
    Ok(())
}

/// Per-trial symmetric capacity at every SNR point, `[trial][snr]`.
fn symmetric_capacity_over_snr(dims: ScenarioDims, cfg: &SimConfig) -> Result<Vec<Vec<f64>>> {
    run_trials(cfg.trials, cfg.seed, |rng, _| {
        let ch = unit_channel(dims, rng)?;
        cfg.snr_grid_db
            .iter()
            .map(|&db| {
                let scaled = ch.scaled(math::sqrt(snr_linear(db)));
                if dims.is_scalar() {
                    let mut e = scaled.user_energies();
                    let cap = sum_capacity(&scaled);
                    Ok(symmetric_from_energies(&mut e, cap))
                } else {
                    Ok(symmetric_capacity(&scaled)?.0)
                }
            })
            .collect()
    })
}

/// Unconditional outage `P(C_sym < R)` of an i.i.d. Rayleigh MAC whose
/// entries have variance SNR, one estimate per SNR point.
pub fn outage_vs_snr(
    dims: ScenarioDims,
    target_rate: f64,
    cfg: &SimConfig,
) -> Result<Vec<OutageEstimate>> {
    check_snr_grid(cfg)?;
    let thr = cfg.rate_convention.threshold(target_rate, dims.users);
    let caps = symmetric_capacity_over_snr(dims, cfg)?;
    Ok(cfg
        .snr_grid_db
        .iter()
        .enumerate()
        .map(|(j, &db)| {
            let hits = caps.iter().filter(|row| row[j] < thr).count();
            OutageEstimate::from_count(db, hits, cfg.trials)
        })
        .collect())
}

/// Average over channel draws of the per-realization analytic bound.
pub fn averaged_bound_vs_snr(
    dims: ScenarioDims,
    target_rate: f64,
    which: BoundKind,
    cfg: &SimConfig,
) -> Result<Vec<MeanEstimate>> {
    check_snr_grid(cfg)?;
    check_bound_dims(dims, which)?;
    let thr = cfg.rate_convention.threshold(target_rate, dims.users);
    let values = run_trials(cfg.trials, cfg.seed, |rng, _| {
        let ch = unit_channel(dims, rng)?;
        cfg.snr_grid_db
            .iter()
            .map(|&db| realization_bound(&ch.scaled(math::sqrt(snr_linear(db))), dims, thr, which))
            .collect::<Result<Vec<f64>>>()
    })?;
    Ok(cfg
        .snr_grid_db
        .iter()
        .enumerate()
        .map(|(j, &db)| {
            let column: Vec<f64> = values.iter().map(|row| row[j]).collect();
            MeanEstimate::from_samples(db, &column)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{atom_probability, mimo_p_out_k, scalar_bounds, two_user_cdf};

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(0, 1).validate().is_err());
        assert!(SimConfig::new(1, 1)
            .with_rate_grid(vec![2.0, 1.0])
            .validate()
            .is_err());
        assert!(SimConfig::new(1, 1)
            .with_snr_grid_db(vec![f64::NAN])
            .validate()
            .is_err());
        assert!(SimConfig::new(1, 1)
            .with_rate_grid(vec![0.0, 1.0])
            .validate()
            .is_ok());
    }

    #[test]
    fn estimate_stderr() {
        let e = OutageEstimate::from_count(1.0, 25, 100);
        assert_eq!(e.p_hat, 0.25);
        assert!((e.stderr - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn two_user_matches_closed_form() {
        let cap = 2.0;
        let cfg = SimConfig::new(100_000, 11).with_rate_grid(grid(0.0, cap, 50));
        let curve = conditional_cdf_scalar(2, cap, &cfg).unwrap();
        for e in &curve.points {
            let p = two_user_cdf(e.point, cap).unwrap();
            let tol = 4.0 * e.stderr.max(1.0 / cfg.trials as f64);
            assert!(
                (e.p_hat - p).abs() <= tol,
                "R={}: {} vs {}",
                e.point,
                e.p_hat,
                p
            );
        }
        assert_eq!(curve.points[0].p_hat, 0.0);
        let atom = atom_probability(cap).unwrap();
        assert!((curve.atom.p_hat - atom).abs() <= 3.0 * curve.atom.stderr);
    }

    #[test]
    fn four_users_between_bounds() {
        let cap = 8.0;
        let cfg = SimConfig::new(20_000, 3).with_rate_grid(grid(0.0, cap, 17));
        let curve = conditional_cdf_scalar(4, cap, &cfg).unwrap();
        for e in &curve.points {
            let b = scalar_bounds(4, e.point, cap).unwrap();
            assert!(e.p_hat >= b.lower - 3.0 * e.stderr - 1e-12);
            assert!(e.p_hat <= b.upper + 3.0 * e.stderr + 1e-12);
        }
    }

    #[test]
    fn frobenius_scalar_dims_reduce_to_scalar() {
        let cfg = SimConfig::new(2_000, 5).with_rate_grid(grid(0.0, 3.0, 7));
        let a = conditional_cdf_scalar(3, 3.0, &cfg).unwrap();
        let b =
            conditional_cdf_mimo_frobenius(ScenarioDims::scalar(3).unwrap(), 3.0, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn subset_cdf_matches_beta_law() {
        let dims = ScenarioDims::new(2, 2, 3).unwrap();
        let cap = 6.0;
        let cfg = SimConfig::new(50_000, 9).with_rate_grid(grid(0.0, cap, 20));
        let est = conditional_subset_cdf(dims, 1, cap, &cfg).unwrap();
        for e in &est {
            let p = mimo_p_out_k(1, dims, e.point, cap).unwrap();
            let tol = 4.0 * e.stderr.max(1.0 / cfg.trials as f64);
            assert!(
                (e.p_hat - p).abs() <= tol,
                "R={}: {} vs {}",
                e.point,
                e.p_hat,
                p
            );
        }
    }

    #[test]
    fn per_user_convention_scales_threshold() {
        let base = SimConfig::new(3_000, 2).with_rate_grid(vec![0.5, 1.0]);
        let per_user = base.clone().with_rate_convention(RateConvention::PerUser);
        let total = base.with_rate_grid(vec![1.0, 2.0]);
        let a = conditional_cdf_scalar(2, 2.0, &per_user).unwrap();
        let b = conditional_cdf_scalar(2, 2.0, &total).unwrap();
        for (x, y) in a.points.iter().zip(&b.points) {
            assert_eq!(x.p_hat, y.p_hat);
        }
    }

    #[test]
    fn runs_are_reproducible() {
        let cfg = SimConfig::new(500, 42).with_rate_grid(grid(0.0, 4.0, 9));
        let a = conditioned_symmetric_samples(3, 4.0, &cfg).unwrap();
        let b = conditioned_symmetric_samples(3, 4.0, &cfg).unwrap();
        assert_eq!(a, b);
        let sequential: Vec<u64> = (0..64u64)
            .map(|t| {
                use rand::RngCore;
                RngStream::new(7, t).rng().next_u64()
            })
            .collect();
        let scheduled = run_trials(64, 7, |rng, _| {
            use rand::RngCore;
            Ok(rng.next_u64())
        })
        .unwrap();
        assert_eq!(sequential, scheduled);
    }

    #[test]
    fn vanishing_snr_is_outage() {
        let dims = ScenarioDims::new(2, 2, 3).unwrap();
        let cfg = SimConfig::new(200, 1).with_snr_grid_db(vec![-30.0]);
        let est = outage_vs_snr(dims, 3.0, &cfg).unwrap();
        assert_eq!(est[0].p_hat, 1.0);
    }

    #[test]
    fn averaged_bound_matches_hand_average() {
        let dims = ScenarioDims::new(2, 2, 3).unwrap();
        let snrs = vec![0.0, 5.0, 10.0];
        let cfg = SimConfig::new(10, 2024).with_snr_grid_db(snrs.clone());
        let curve = averaged_bound_vs_snr(dims, 3.0, BoundKind::FrobeniusUnion, &cfg).unwrap();
        for (j, db) in snrs.iter().enumerate() {
            let mut acc = 0.0;
            for t in 0..10 {
                let mut rng = RngStream::new(2024, t).rng();
                let ch = MacChannel::sample_rayleigh(2, 3, 2, 1.0, &mut rng).unwrap();
                let snr = 10f64.powf(db / 10.0);
                let ch = ch.scaled(snr.sqrt());
                let e: f64 = ch.user_energies().iter().sum();
                let frob = (1.0 + e).log2();
                acc += if 3.0 > frob {
                    1.0
                } else {
                    mimo_union_bound(dims, 3.0, frob).unwrap()
                };
            }
            assert!((curve[j].mean - acc / 10.0).abs() < 1e-12);
        }
    }

    #[test]
    fn frobenius_bound_dominates_empirical() {
        let dims = ScenarioDims::new(2, 2, 3).unwrap();
        let cfg = SimConfig::new(2_000, 8).with_snr_grid_db(vec![-5.0, 0.0, 5.0, 10.0]);
        let emp = outage_vs_snr(dims, 3.0, &cfg).unwrap();
        let bound = averaged_bound_vs_snr(dims, 3.0, BoundKind::FrobeniusUnion, &cfg).unwrap();
        for (e, b) in emp.iter().zip(&bound) {
            assert!(
                b.mean >= e.p_hat - 3.0 * e.stderr,
                "{} dB: {} < {}",
                e.point,
                b.mean,
                e.p_hat
            );
        }
    }

    #[test]
    fn guards() {
        let dims = ScenarioDims::new(3, 1, 2).unwrap();
        let cfg = SimConfig::new(5, 0).with_snr_grid_db(vec![0.0]);
        assert!(averaged_bound_vs_snr(dims, 3.0, BoundKind::TwoUserSimo, &cfg).is_err());
        let zero = SimConfig::new(0, 0).with_snr_grid_db(vec![0.0]);
        assert!(averaged_bound_vs_snr(dims, 3.0, BoundKind::FrobeniusUnion, &zero).is_err());
        let empty = SimConfig::new(5, 0);
        assert!(outage_vs_snr(dims, 3.0, &empty).is_err());
        assert!(conditional_cdf_scalar(2, 0.0, &empty).is_err());
    }
}
