//! Mutual-information quantities of one MAC realization: per-subset rates,
//! sum capacity, symmetric capacity and their Frobenius-norm counterparts.
//!
//! User indices are zero-based throughout.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::invalid;
use crate::linalg::{log2_det_hpd, CMat, C64};
use crate::math;
use crate::sampling::sample_complex_gaussian;
use crate::Result;

/// Largest user count accepted by the exhaustive subset enumeration.
pub const MAX_ENUMERATED_USERS: usize = 20;

/// A multiple-access channel realization: one `N_r x N_t` matrix per user,
/// with the SNR absorbed into the gains.
#[derive(Clone, Debug, PartialEq)]
pub struct MacChannel {
    users: Vec<CMat>,
}

impl MacChannel {
    pub fn new(users: Vec<CMat>) -> Result<Self> {
        let Some(first) = users.first() else {
            return Err(invalid!("a MAC needs at least one user"));
        };
        let dims = (first.rows(), first.cols());
        if dims.0 == 0 || dims.1 == 0 {
            return Err(invalid!("user matrices must be non-empty"));
        }
        if users.iter().any(|h| (h.rows(), h.cols()) != dims) {
            return Err(invalid!("all user matrices must share the same dimensions"));
        }
        if users.iter().any(|h| !h.is_finite()) {
            return Err(invalid!("channel gains must be finite"));
        }
        Ok(Self { users })
    }

    /// Single-antenna users with complex gains `h`.
    pub fn scalar(gains: &[C64]) -> Result<Self> {
        Self::new(
            gains
                .iter()
                .map(|&g| CMat::from_fn(1, 1, |_, _| g))
                .collect(),
        )
    }

    /// i.i.d. Rayleigh draw: every entry `CN(0, snr)`.
    pub fn sample_rayleigh<R: Rng + ?Sized>(
        users: usize,
        rx: usize,
        tx: usize,
        snr: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let mats = (0..users)
            .map(|_| sample_complex_gaussian(rx, tx, snr, rng))
            .collect::<Result<Vec<_>>>()?;
        Self::new(mats)
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn rx_antennas(&self) -> usize {
        self.users[0].rows()
    }

    pub fn tx_antennas(&self) -> usize {
        self.users[0].cols()
    }

    pub fn is_scalar(&self) -> bool {
        self.rx_antennas() == 1 && self.tx_antennas() == 1
    }

    pub fn user(&self, i: usize) -> &CMat {
        &self.users[i]
    }

    pub fn users(&self) -> &[CMat] {
        &self.users
    }

    /// The stacked matrix `[H₁ H₂ … H_N]`.
    pub fn stacked(&self) -> CMat {
        let refs: Vec<&CMat> = self.users.iter().collect();
        CMat::hconcat(&refs).expect("user matrices share dimensions")
    }

    /// Every gain multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            users: self.users.iter().map(|h| h.scale(factor)).collect(),
        }
    }

    /// Squared Frobenius norm of each user's matrix.
    pub fn user_energies(&self) -> Vec<f64> {
        self.users.iter().map(CMat::frobenius_norm_sqr).collect()
    }

    fn check_subset(&self, subset: &[usize]) -> Result<()> {
        if subset.is_empty() {
            return Err(invalid!("subset must be non-empty"));
        }
        let mut seen = vec![false; self.num_users()];
        for &i in subset {
            if i >= self.num_users() {
                return Err(invalid!(
                    "user index {i} out of range for {} users",
                    self.num_users()
                ));
            }
            if core::mem::replace(&mut seen[i], true) {
                return Err(invalid!("user index {i} repeated in subset"));
            }
        }
        Ok(())
    }

    fn info_of(&self, members: impl Iterator<Item = usize>) -> f64 {
        let nr = self.rx_antennas();
        let mut k = CMat::identity(nr);
        for i in members {
            k = &k + &self.users[i].outer_gram();
        }
        log2_det_hpd(&k).expect("I + Σ H Hᴴ is positive definite")
    }
}

/// One subset `S` with its rate `C(S)` and the symmetric-rate constraint
/// `N/|S| · C(S)` it implies.
#[derive(Clone, Debug, PartialEq)]
pub struct SubsetReport {
    pub subset: Vec<usize>,
    pub rate_bits: f64,
    pub scaled_rate_bits: f64,
}

/// `C(S) = log₂ det(I + Σ_{i∈S} H_i H_iᴴ)`.
pub fn subset_mutual_info(ch: &MacChannel, subset: &[usize]) -> Result<f64> {
    ch.check_subset(subset)?;
    Ok(ch.info_of(subset.iter().copied()))
}

/// Sum capacity `C = C({1, …, N})`.
pub fn sum_capacity(ch: &MacChannel) -> f64 {
    ch.info_of(0..ch.num_users())
}

/// Symmetric capacity `min_S N/|S| · C(S)` (total rate), with a bottleneck
/// subset attaining it. The full set is visited first, so it is reported
/// whenever it ties for the minimum.
pub fn symmetric_capacity(ch: &MacChannel) -> Result<(f64, SubsetReport)> {
    let n = ch.num_users();
    if n > MAX_ENUMERATED_USERS {
        return Err(invalid!(
            "{n} users exceeds the enumeration cap of {MAX_ENUMERATED_USERS}; \
             use symmetric_capacity_scalar_sorted for single-antenna channels"
        ));
    }
    let full = (1u32 << n) - 1;
    let mut best: Option<(f64, u32, f64)> = None;
    for mask in core::iter::once(full).chain(1..full) {
        let size = mask.count_ones() as usize;
        let rate = ch.info_of((0..n).filter(|i| mask >> i & 1 == 1));
        let scaled = n as f64 / size as f64 * rate;
        if best.is_none_or(|(b, _, _)| scaled < b) {
            best = Some((scaled, mask, rate));
        }
    }
    let (scaled, mask, rate) = best.expect("at least one subset");
    let report = SubsetReport {
        subset: (0..n).filter(|i| mask >> i & 1 == 1).collect(),
        rate_bits: rate,
        scaled_rate_bits: scaled,
    };
    Ok((scaled, report))
}

/// Symmetric capacity of a single-antenna MAC from the gains `|h_i|²`.
///
/// For each cardinality `k` the binding subset is the `k` weakest users, so
/// only `N` prefix sums of the sorted gains need to be examined.
pub fn symmetric_capacity_scalar_sorted(gains: &[f64]) -> f64 {
    let mut sorted = gains.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut prefix = 0.0;
    let mut best = f64::INFINITY;
    for (k, g) in sorted.iter().enumerate() {
        prefix += g;
        let scaled = n / (k + 1) as f64 * math::log2_1p(prefix);
        best = best.min(scaled);
    }
    best
}

/// `C̃(S) = log₂(1 + ‖𝓗_S‖²_F)`, a lower bound on `C(S)`.
pub fn frobenius_subset_info(ch: &MacChannel, subset: &[usize]) -> Result<f64> {
    ch.check_subset(subset)?;
    let energy: f64 = subset
        .iter()
        .map(|&i| ch.users[i].frobenius_norm_sqr())
        .sum();
    Ok(math::log2_1p(energy))
}

/// `C̃ = log₂(1 + ‖𝓗‖²_F)`.
pub fn frobenius_sum(ch: &MacChannel) -> f64 {
    math::log2_1p(ch.user_energies().iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::RngStream;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn scalar_from_gains(gains: &[f64]) -> MacChannel {
        let h: Vec<C64> = gains.iter().map(|g| c(g.sqrt())).collect();
        MacChannel::scalar(&h).unwrap()
    }

    #[test]
    fn subset_info_scalar_examples() {
        let ch = MacChannel::scalar(&[c(1.0), c(1.0)]).unwrap();
        assert!((subset_mutual_info(&ch, &[0]).unwrap() - 1.0).abs() < 1e-15);
        let ch = scalar_from_gains(&[1.0, 2.0]);
        assert!((subset_mutual_info(&ch, &[0, 1]).unwrap() - 2.0).abs() < 1e-14);
        let zero = MacChannel::new(vec![CMat::zeros(2, 2); 3]).unwrap();
        assert_eq!(subset_mutual_info(&zero, &[1, 2]).unwrap(), 0.0);
    }

    #[test]
    fn subset_info_rejects_bad_subsets() {
        let ch = scalar_from_gains(&[1.0, 2.0]);
        assert!(subset_mutual_info(&ch, &[]).is_err());
        assert!(subset_mutual_info(&ch, &[2]).is_err());
        assert!(subset_mutual_info(&ch, &[1, 1]).is_err());
    }

    #[test]
    fn channel_rejects_mismatched_users() {
        assert!(MacChannel::new(vec![]).is_err());
        assert!(MacChannel::new(vec![CMat::zeros(2, 1), CMat::zeros(1, 2)]).is_err());
    }

    #[test]
    fn sum_capacity_examples() {
        let zero = MacChannel::new(vec![CMat::zeros(1, 1); 2]).unwrap();
        assert_eq!(sum_capacity(&zero), 0.0);
        let ch = MacChannel::scalar(&[c(1.0), c(1.0)]).unwrap();
        assert!((sum_capacity(&ch) - 3f64.log2()).abs() < 1e-15);
    }

    #[test]
    fn symmetric_capacity_examples() {
        let ch = MacChannel::scalar(&[c(1.0), c(1.0)]).unwrap();
        let (rate, report) = symmetric_capacity(&ch).unwrap();
        assert!((rate - 3f64.log2()).abs() < 1e-15);
        assert_eq!(report.subset, vec![0, 1]);

        let single = MacChannel::scalar(&[c(1.7)]).unwrap();
        assert_eq!(
            symmetric_capacity(&single).unwrap().0,
            sum_capacity(&single)
        );

        let ch = scalar_from_gains(&[3.0, 0.0]);
        let (rate, report) = symmetric_capacity(&ch).unwrap();
        assert_eq!(rate, 0.0);
        assert_eq!(report.subset, vec![1]);
        assert_eq!(report.scaled_rate_bits, 0.0);
    }

    #[test]
    fn symmetric_capacity_refuses_large_n() {
        let ch = scalar_from_gains(&[1.0; 21]);
        assert!(symmetric_capacity(&ch).is_err());
        assert!(symmetric_capacity_scalar_sorted(&[1.0; 21]).is_finite());
    }

    #[test]
    fn scalar_shortcut_examples() {
        assert!((symmetric_capacity_scalar_sorted(&[1.0, 1.0]) - 3f64.log2()).abs() < 1e-15);
        let a = symmetric_capacity_scalar_sorted(&[0.3, 2.0, 5.0, 1.1]);
        let b = symmetric_capacity_scalar_sorted(&[5.0, 1.1, 0.3, 2.0]);
        assert_eq!(a, b);
    }

    #[test]
    fn scalar_shortcut_matches_enumeration_8_users() {
        let mut rng = RngStream::new(11, 0).rng();
        let ch = MacChannel::sample_rayleigh(8, 1, 1, 10.0, &mut rng).unwrap();
        let gains = ch.user_energies();
        let fast = symmetric_capacity_scalar_sorted(&gains);
        let (slow, _) = symmetric_capacity(&ch).unwrap();
        assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
    }

    #[test]
    fn frobenius_examples() {
        let ch = scalar_from_gains(&[0.7, 2.5]);
        for s in [&[0usize][..], &[1], &[0, 1]] {
            let a = frobenius_subset_info(&ch, s).unwrap();
            let b = subset_mutual_info(&ch, s).unwrap();
            assert!((a - b).abs() < 1e-14);
        }
        let ch = MacChannel::new(vec![CMat::identity(2)]).unwrap();
        assert!((frobenius_sum(&ch) - 3f64.log2()).abs() < 1e-15);
        assert!((sum_capacity(&ch) - 2.0).abs() < 1e-15);
        let zero = MacChannel::new(vec![CMat::zeros(2, 3); 2]).unwrap();
        assert_eq!(frobenius_sum(&zero), 0.0);
    }

    #[test]
    fn stacked_layout() {
        let mut rng = RngStream::new(12, 0).rng();
        let ch = MacChannel::sample_rayleigh(3, 2, 2, 1.0, &mut rng).unwrap();
        let s = ch.stacked();
        assert_eq!((s.rows(), s.cols()), (2, 6));
        assert_eq!(s[(1, 5)], ch.user(2)[(1, 1)]);
    }

    fn arb_channel() -> impl Strategy<Value = (u64, usize, usize, usize, f64)> {
        (
            any::<u64>(),
            1usize..=4,
            1usize..=3,
            1usize..=3,
            -10.0f64..25.0,
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn sym_below_sum_and_frobenius_below_true((seed, n, nr, nt, snr_db) in arb_channel()) {
            let mut rng = RngStream::new(seed, 0).rng();
            let snr = 10f64.powf(snr_db / 10.0);
            let ch = MacChannel::sample_rayleigh(n, nr, nt, snr, &mut rng).unwrap();
            let c = sum_capacity(&ch);
            let (sym, _) = symmetric_capacity(&ch).unwrap();
            prop_assert!(sym <= c + 1e-12);
            prop_assert!(frobenius_sum(&ch) <= c + 1e-12);
            for mask in 1u32..(1 << n) {
                let s: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                prop_assert!(
                    frobenius_subset_info(&ch, &s).unwrap()
                        <= subset_mutual_info(&ch, &s).unwrap() + 1e-12
                );
            }
        }

        #[test]
        fn permutation_and_scaling((seed, n, nr, nt, snr_db) in arb_channel(), g in 1.0f64..3.0) {
            let mut rng = RngStream::new(seed, 1).rng();
            let snr = 10f64.powf(snr_db / 10.0);
            let ch = MacChannel::sample_rayleigh(n, nr, nt, snr, &mut rng).unwrap();
            let mut users = ch.users().to_vec();
            users.reverse();
            let rev = MacChannel::new(users).unwrap();
            prop_assert!((sum_capacity(&ch) - sum_capacity(&rev)).abs() < 1e-10);
            prop_assert!(
                (symmetric_capacity(&ch).unwrap().0 - symmetric_capacity(&rev).unwrap().0).abs() < 1e-10
            );
            let big = ch.scaled(g);
            prop_assert!(sum_capacity(&big) >= sum_capacity(&ch) - 1e-12);
            prop_assert!(symmetric_capacity(&big).unwrap().0 >= symmetric_capacity(&ch).unwrap().0 - 1e-12);
            prop_assert!(frobenius_sum(&big) >= frobenius_sum(&ch) - 1e-12);
        }

        #[test]
        fn adding_a_user_never_lowers_sum_capacity((seed, n, nr, nt, snr_db) in arb_channel()) {
            let mut rng = RngStream::new(seed, 2).rng();
            let snr = 10f64.powf(snr_db / 10.0);
            let ch = MacChannel::sample_rayleigh(n + 1, nr, nt, snr, &mut rng).unwrap();
            let fewer = MacChannel::new(ch.users()[..n].to_vec()).unwrap();
            prop_assert!(sum_capacity(&ch) >= sum_capacity(&fewer) - 1e-12);
        }

        #[test]
        fn scalar_shortcut_equals_enumeration(seed in any::<u64>(), n in 1usize..=10, snr_db in -10.0f64..30.0) {
            let mut rng = RngStream::new(seed, 3).rng();
            let ch = MacChannel::sample_rayleigh(n, 1, 1, 10f64.powf(snr_db / 10.0), &mut rng).unwrap();
            let fast = symmetric_capacity_scalar_sorted(&ch.user_energies());
            let (slow, _) = symmetric_capacity(&ch).unwrap();
            prop_assert!((fast - slow).abs() <= 1e-12 * slow.max(1.0));
        }
    }
}
