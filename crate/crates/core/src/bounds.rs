//! Closed-form conditional outage probabilities of the symmetric capacity.
//!
//! Every function here evaluates `P(C_sym < R | C)` (or a bound on it) for a
//! channel conditioned on its sum capacity `C`, or on its Frobenius
//! capacity `C̃` in the MIMO case. Conditioned on `C`, the gain vector is
//! uniform on a complex sphere, so partial energy fractions are Beta
//! distributed and everything reduces to incomplete beta functions.

use crate::error::invalid;
use crate::math;
use crate::special::regularized_incomplete_beta;
use crate::Result;

/// Slack allowed when checking `R <= C`, so that grids ending exactly at `C`
/// survive rounding.
const RATE_SLACK: f64 = 1e-12;

/// Lower and upper bound on an outage probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundPair {
    pub lower: f64,
    /// Upper bound clamped to 1.
    pub upper: f64,
    /// Upper bound before clamping; the union bound can exceed 1.
    pub upper_raw: f64,
}

/// Number of users and antennas of a symmetric MIMO-MAC.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ScenarioDims {
    pub users: usize,
    pub tx: usize,
    pub rx: usize,
}

impl ScenarioDims {
    pub fn new(users: usize, tx: usize, rx: usize) -> Result<Self> {
        if users == 0 || tx == 0 || rx == 0 {
            return Err(invalid!(
                "users and antenna counts must all be at least 1, got N={users}, N_t={tx}, N_r={rx}"
            ));
        }
        Ok(Self { users, tx, rx })
    }

    pub fn scalar(users: usize) -> Result<Self> {
        Self::new(users, 1, 1)
    }

    /// Complex dimension of the vectorized stacked channel.
    pub fn channel_dim(&self) -> usize {
        self.users * self.tx * self.rx
    }

    pub fn is_scalar(&self) -> bool {
        self.tx == 1 && self.rx == 1
    }
}

/// Checks `0 <= rate <= cap` and returns the rate pulled back onto `cap`
/// if it overshoots by rounding only.
fn check_rate(rate: f64, cap: f64) -> Result<f64> {
    if !(cap.is_finite() && cap >= 0.0) {
        return Err(invalid!(
            "capacity must be finite and non-negative, got {cap}"
        ));
    }
    if !(rate.is_finite() && rate >= 0.0) {
        return Err(invalid!("rate must be finite and non-negative, got {rate}"));
    }
    if rate > cap + RATE_SLACK * cap.max(1.0) {
        return Err(invalid!(
            "rate {rate} exceeds the conditioning capacity {cap}"
        ));
    }
    Ok(rate.min(cap))
}

/// Exact two-user CDF: `P(C_sym < R | C) = 2(2^{R/2} - 1)/(2^C - 1)`.
pub fn two_user_cdf(rate: f64, sum_cap: f64) -> Result<f64> {
    if !(sum_cap > 0.0) {
        return Err(invalid!("sum capacity must be positive, got {sum_cap}"));
    }
    let rate = check_rate(rate, sum_cap)?;
    Ok(2.0 * math::exp2_m1_ratio(rate / 2.0, sum_cap))
}

/// Probability that the symmetric rate line crosses the dominant face, i.e.
/// `P(C_sym = C | C) = 1 - 2(2^{C/2} - 1)/(2^C - 1)`, for two users.
pub fn atom_probability(sum_cap: f64) -> Result<f64> {
    if !(sum_cap.is_finite() && sum_cap > 0.0) {
        return Err(invalid!(
            "sum capacity must be positive and finite, got {sum_cap}"
        ));
    }
    // 1 - 2/(2^{C/2} + 1) = tanh(C ln2 / 4)
    Ok(math::tanh(sum_cap * core::f64::consts::LN_2 / 4.0))
}

/// `P((N/k)·C(S) < R | C)` for any fixed subset of `k` users, scalar MAC.
///
/// `k = N` is the event `C < R`, which has probability 0 under `R <= C`.
pub fn p_out_k(k: usize, users: usize, rate: f64, sum_cap: f64) -> Result<f64> {
    if users == 0 || k == 0 || k > users {
        return Err(invalid!("subset size must lie in 1..={users}, got {k}"));
    }
    let rate = check_rate(rate, sum_cap)?;
    if k == users || rate == 0.0 {
        return Ok(0.0);
    }
    // energy fraction of k of the N users is Beta(k, N-k)
    let x = math::exp2_m1_ratio(rate * k as f64 / users as f64, sum_cap).min(1.0);
    regularized_incomplete_beta(x, k as u32, (users - k) as u32)
}

/// Lower bound `max_k P_out(k)` and union upper bound `Σ_k C(N,k) P_out(k)`
/// on the scalar conditional CDF.
pub fn scalar_bounds(users: usize, rate: f64, sum_cap: f64) -> Result<BoundPair> {
    if users < 2 {
        return Err(invalid!(
            "the bracketing bounds need at least 2 users, got {users}"
        ));
    }
    let rate = check_rate(rate, sum_cap)?;
    let mut lower: f64 = 0.0;
    let mut upper_raw = 0.0;
    for k in 1..users {
        let p = p_out_k(k, users, rate, sum_cap)?;
        lower = lower.max(p);
        upper_raw += math::binomial(users as u32, k as u32) * p;
    }
    Ok(BoundPair {
        lower,
        upper: upper_raw.min(1.0),
        upper_raw,
    })
}

/// `P((N/k)·C̃(S) < R | C̃)` for a fixed subset of `k` users of a MIMO-MAC:
/// a Beta(k·N_r·N_t, (N-k)·N_r·N_t) law at `(2^{Rk/N} - 1)/(2^C̃ - 1)`.
pub fn mimo_p_out_k(k: usize, dims: ScenarioDims, rate: f64, frob_cap: f64) -> Result<f64> {
    let n = dims.users;
    if k == 0 || k > n {
        return Err(invalid!("subset size must lie in 1..={n}, got {k}"));
    }
    let rate = check_rate(rate, frob_cap)?;
    if k == n || rate == 0.0 {
        return Ok(0.0);
    }
    let per = (dims.rx * dims.tx) as u32;
    let a = k as u32 * per;
    let b = (n - k) as u32 * per;
    let x = math::exp2_m1_ratio(rate * k as f64 / n as f64, frob_cap).min(1.0);
    regularized_incomplete_beta(x, a, b)
}

/// Union bound `Σ_k C(N,k) P̃_out(k)` before clamping.
pub fn mimo_union_bound_raw(dims: ScenarioDims, rate: f64, frob_cap: f64) -> Result<f64> {
    let rate = check_rate(rate, frob_cap)?;
    let n = dims.users;
    let mut acc = 0.0;
    for k in 1..n {
        acc += math::binomial(n as u32, k as u32) * mimo_p_out_k(k, dims, rate, frob_cap)?;
    }
    Ok(acc)
}

/// Upper bound on `P(C_sym < R | C̃)` for the MIMO-MAC, clamped to 1.
pub fn mimo_union_bound(dims: ScenarioDims, rate: f64, frob_cap: f64) -> Result<f64> {
    Ok(mimo_union_bound_raw(dims, rate, frob_cap)?.min(1.0))
}

/// Two single-antenna users, `N_r` receive antennas:
/// `P(C_sym < R | C) <= 1 - √(1 - 2^{-(C-R)})`.
pub fn two_user_simo_bound(rate: f64, sum_cap: f64) -> Result<f64> {
    let rate = check_rate(rate, sum_cap)?;
    let y = math::exp2(-(sum_cap - rate));
    // 1 - √(1-y) = y / (1 + √(1-y))
    Ok(y / (1.0 + math::sqrt(1.0 - y)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_user_examples() {
        assert!((two_user_cdf(2.0, 2.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(two_user_cdf(0.0, 3.0).unwrap(), 0.0);
        assert!((two_user_cdf(10.0, 10.0).unwrap() - 62.0 / 1023.0).abs() < 1e-15);
        assert!(two_user_cdf(3.0, 2.0).is_err());
        assert!(two_user_cdf(1.0, 0.0).is_err());
        assert!(two_user_cdf(-1.0, 2.0).is_err());
    }

    #[test]
    fn atom_examples() {
        assert!((atom_probability(2.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((atom_probability(10.0).unwrap() - 961.0 / 1023.0).abs() < 1e-15);
        let tiny = atom_probability(1e-6).unwrap();
        assert!(tiny > 0.0 && tiny < 1e-3);
        assert!(atom_probability(0.0).is_err());
        assert!(atom_probability(-1.0).is_err());
        for c in [0.5, 1.0, 2.0, 5.0, 12.0] {
            let direct = 1.0 - two_user_cdf(c, c).unwrap();
            assert!((atom_probability(c).unwrap() - direct).abs() < 1e-12);
        }
        // complement 2/(2^30 + 1)
        let gap = 1.0 - atom_probability(60.0).unwrap();
        assert!((gap / (2.0 / (2f64.powi(30) + 1.0)) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn p_out_k_examples() {
        for &(r, c) in &[(1.0, 2.0), (0.5, 4.0), (3.0, 3.0)] {
            let expected = (2f64.powf(r / 2.0) - 1.0) / (2f64.powf(c) - 1.0);
            assert!((p_out_k(1, 2, r, c).unwrap() - expected).abs() < 1e-15);
        }
        let x: f64 = 3.0 / 255.0;
        let expected = 1.0 - (1.0 - x).powi(3);
        let got = p_out_k(1, 4, 8.0, 8.0).unwrap();
        assert!((got - expected).abs() < 1e-15);
        assert!((got - 0.034880521066558).abs() < 1e-14);
        assert_eq!(p_out_k(2, 4, 0.0, 8.0).unwrap(), 0.0);
        assert_eq!(p_out_k(4, 4, 8.0, 8.0).unwrap(), 0.0);
        assert!(p_out_k(0, 4, 1.0, 8.0).is_err());
        assert!(p_out_k(5, 4, 1.0, 8.0).is_err());
        assert!(p_out_k(1, 4, 9.0, 8.0).is_err());
    }

    #[test]
    fn scalar_bounds_two_users_is_exact() {
        for i in 0..=20 {
            let r = 3.0 * i as f64 / 20.0;
            let b = scalar_bounds(2, r, 3.0).unwrap();
            let exact = two_user_cdf(r, 3.0).unwrap();
            assert!((b.upper - exact).abs() < 1e-12);
            assert!((b.lower - exact / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn scalar_bounds_four_users() {
        assert_eq!(
            scalar_bounds(4, 0.0, 8.0).unwrap(),
            BoundPair {
                lower: 0.0,
                upper: 0.0,
                upper_raw: 0.0
            }
        );
        let b = scalar_bounds(4, 8.0, 8.0).unwrap();
        // closed forms: Beta(1,3) at 3/255, Beta(2,2) at 15/255, Beta(3,1) at 63/255
        let x1: f64 = 3.0 / 255.0;
        let x2: f64 = 15.0 / 255.0;
        let x3: f64 = 63.0 / 255.0;
        let p1 = 1.0 - (1.0 - x1).powi(3);
        let p2 = 3.0 * x2 * x2 - 2.0 * x2 * x2 * x2;
        let p3 = x3 * x3 * x3;
        assert!((b.lower - p1).abs() < 1e-15);
        assert!((b.upper - (4.0 * p1 + 6.0 * p2 + 4.0 * p3)).abs() < 1e-14);
        // mpmath betainc reference
        assert!((b.upper - 0.259683289232648).abs() < 1e-14, "{}", b.upper);
        assert!(scalar_bounds(1, 0.5, 1.0).is_err());
    }

    #[test]
    fn union_bound_clamps() {
        let dims = ScenarioDims::scalar(6).unwrap();
        let raw = mimo_union_bound_raw(dims, 2.0, 2.0).unwrap();
        assert!(raw > 1.0);
        assert_eq!(mimo_union_bound(dims, 2.0, 2.0).unwrap(), 1.0);
        let b = scalar_bounds(6, 2.0, 2.0).unwrap();
        assert_eq!(b.upper, 1.0);
        assert_eq!(b.upper_raw, raw);
    }

    #[test]
    fn mimo_collapses_to_scalar() {
        for n in 2..=5 {
            let dims = ScenarioDims::scalar(n).unwrap();
            for k in 1..n {
                for i in 0..=10 {
                    let r = 6.0 * i as f64 / 10.0;
                    assert_eq!(
                        mimo_p_out_k(k, dims, r, 6.0).unwrap(),
                        p_out_k(k, n, r, 6.0).unwrap()
                    );
                }
            }
            let r = 4.5;
            assert!(
                (mimo_union_bound(dims, r, 6.0).unwrap() - scalar_bounds(n, r, 6.0).unwrap().upper)
                    .abs()
                    < 1e-15
            );
        }
    }

    #[test]
    fn mimo_3x2_value() {
        let dims = ScenarioDims::new(2, 2, 3).unwrap();
        let got = mimo_p_out_k(1, dims, 3.0, 6.0).unwrap();
        // Beta(6, 6) CDF at x: Σ_{j=6}^{11} C(11,j) x^j (1-x)^{11-j}
        let x = (2f64.powf(1.5) - 1.0) / 63.0;
        let mut expected = 0.0;
        for j in 6..=11 {
            expected +=
                crate::math::binomial(11, j) * x.powi(j as i32) * (1.0 - x).powi(11 - j as i32);
        }
        assert!(
            (got - expected).abs() < 1e-12 * expected,
            "{got} vs {expected}"
        );
        // mpmath betainc reference
        assert!((got - 2.43456712977461e-7).abs() < 1e-12 * got, "{got:e}");
        assert_eq!(mimo_p_out_k(1, dims, 0.0, 6.0).unwrap(), 0.0);
    }

    #[test]
    fn simo_bound_examples() {
        assert_eq!(two_user_simo_bound(4.0, 4.0).unwrap(), 1.0);
        assert!((two_user_simo_bound(3.0, 4.0).unwrap() - (1.0 - 0.5f64.sqrt())).abs() < 1e-15);
        let v = two_user_simo_bound(0.0, 10.0).unwrap();
        assert!((v - 4.884005175327e-4).abs() < 1e-15);
        // small-y behaviour: ≈ y/2
        assert!((v - 2f64.powi(-10) / 2.0).abs() < 2e-7);
        assert!(two_user_simo_bound(5.0, 4.0).is_err());
    }

    #[test]
    fn dims_validation() {
        assert!(ScenarioDims::new(0, 1, 1).is_err());
        assert!(ScenarioDims::new(2, 0, 1).is_err());
        assert_eq!(ScenarioDims::new(2, 2, 3).unwrap().channel_dim(), 12);
    }

    proptest! {
        #[test]
        fn outputs_are_probabilities_and_monotone(
            n in 2usize..=6, nt in 1usize..=3, nr in 1usize..=3,
            c in 0.1f64..20.0, f1 in 0.0f64..=1.0, f2 in 0.0f64..=1.0, dc in 0.0f64..5.0,
        ) {
            let dims = ScenarioDims::new(n, nt, nr).unwrap();
            let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
            let (r1, r2) = (lo * c, hi * c);
            for k in 1..=n {
                let a = mimo_p_out_k(k, dims, r1, c).unwrap();
                let b = mimo_p_out_k(k, dims, r2, c).unwrap();
                prop_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
                prop_assert!(b >= a - 1e-15);
                // larger conditioning capacity: less outage
                let d = mimo_p_out_k(k, dims, r1, c + dc).unwrap();
                prop_assert!(d <= a + 1e-15);
            }
            let u1 = mimo_union_bound(dims, r1, c).unwrap();
            let u2 = mimo_union_bound(dims, r2, c).unwrap();
            prop_assert!(u2 >= u1 - 1e-15 && u2 <= 1.0);
            let b1 = scalar_bounds(n, r1, c).unwrap();
            let b2 = scalar_bounds(n, r2, c).unwrap();
            prop_assert!(b1.lower <= b1.upper);
            prop_assert!(b2.lower >= b1.lower - 1e-15 && b2.upper >= b1.upper - 1e-15);
            let s1 = two_user_simo_bound(r1, c).unwrap();
            let s2 = two_user_simo_bound(r2, c).unwrap();
            prop_assert!(s2 >= s1 - 1e-15 && s2 <= 1.0 && s1 >= 0.0);
        }

        #[test]
        fn theorem_one_is_twice_p_out_one(c in 0.01f64..40.0, f in 0.0f64..=1.0) {
            let r = f * c;
            let t1 = two_user_cdf(r, c).unwrap();
            let via_k = 2.0 * p_out_k(1, 2, r, c).unwrap();
            prop_assert!((t1 - via_k).abs() <= 1e-12);
            let upper = scalar_bounds(2, r, c).unwrap().upper;
            prop_assert!((t1 - upper).abs() <= 1e-12);
        }
    }
}
