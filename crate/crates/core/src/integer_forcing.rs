//! Integer-forcing (IF) and IF-SIC receivers over a space-time precoded MAC.
//!
//! Each user may mix its own symbols across `T` channel uses with a `T x T`
//! unitary precoder. The receiver sees the stacked effective channel `H`,
//! forms `K = (I + HᴴH)⁻¹`, picks a full-rank Gaussian-integer matrix `A`
//! and decodes the integer combinations `a_mᴴ x`. Stream `m` then sees noise
//! variance `a_mᴴ K a_m` (plain IF) or the squared `m`-th diagonal entry of
//! the Cholesky factor of `Ā K Āᴴ` (IF-SIC).
//!
//! All forms are evaluated through a generator `G` with `K = GᴴG`, so they
//! remain accurate at sum capacities where `K` itself is numerically
//! singular.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::bounds::{scalar_bounds, two_user_cdf};
use crate::error::invalid;
use crate::lattice::{lll_search, GaussianIntMatrix, Lattice};
use crate::linalg::{householder_qr, lower_triangular_inverse, CMat, C64};
use crate::mac::MacChannel;
use crate::math;
use crate::monte_carlo::{
    conditional_curve, conditioned_symmetric_samples, run_trials, CdfCurve, SimConfig,
};
use crate::sampling::{sample_haar_unitary, sample_sphere_conditioned};
use crate::Result;

/// Largest stream count for which every SIC decoding order is tried.
pub const MAX_EXHAUSTIVE_SIC: usize = 4;

const UNITARY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PrecoderKind {
    /// No precoding, `T = 1`.
    None,
    /// Independent Haar unitaries per user over `T = 2` channel uses.
    Haar,
    /// The fixed pair of `2 x 2` golden-ratio matrices of Badr and Belfiore.
    BadrBelfiore,
}

impl PrecoderKind {
    pub fn time_extension(self) -> usize {
        match self {
            PrecoderKind::None => 1,
            PrecoderKind::Haar | PrecoderKind::BadrBelfiore => 2,
        }
    }
}

/// Per-user unitary precoders.
#[derive(Clone, Debug, PartialEq)]
pub struct Precoder {
    kind: PrecoderKind,
    per_user: Vec<CMat>,
}

/// `(P1, P2)`: `P1 = [[α, αφ], [ᾱ, ᾱφ̄]]/√5` and `P2` equal to `P1` with its
/// first row multiplied by `j`, where `φ = (1+√5)/2`, `φ̄ = (1-√5)/2`,
/// `α = 1 + j - jφ` and `ᾱ = 1 + j - jφ̄`.
pub fn badr_belfiore_precoders() -> (CMat, CMat) {
    let s5 = math::sqrt(5.0);
    let phi = (1.0 + s5) / 2.0;
    let phi_bar = (1.0 - s5) / 2.0;
    let alpha = C64::new(1.0, 1.0 - phi);
    let alpha_bar = C64::new(1.0, 1.0 - phi_bar);
    let j = C64::new(0.0, 1.0);
    let p1 = CMat::from_fn(2, 2, |r, c| {
        let v = match (r, c) {
            (0, 0) => alpha,
            (0, _) => alpha * phi,
            (_, 0) => alpha_bar,
            _ => alpha_bar * phi_bar,
        };
        v / s5
    });
    let p2 = CMat::from_fn(
        2,
        2,
        |r, c| if r == 0 { j * p1[(r, c)] } else { p1[(r, c)] },
    );
    (p1, p2)
}

fn unitary_defect(p: &CMat) -> f64 {
    (&p.adjoint() * p).max_abs_diff(&CMat::identity(p.cols()))
}

impl Precoder {
    pub fn none() -> Self {
        Self {
            kind: PrecoderKind::None,
            per_user: Vec::new(),
        }
    }

    /// Explicit per-user matrices; each must be `T x T` unitary with the `T`
    /// of `kind`.
    pub fn from_matrices(kind: PrecoderKind, per_user: Vec<CMat>) -> Result<Self> {
        let t = kind.time_extension();
        if kind == PrecoderKind::None {
            if !per_user.is_empty() {
                return Err(invalid!("the identity precoder takes no matrices"));
            }
            return Ok(Self::none());
        }
        for (i, p) in per_user.iter().enumerate() {
            if p.rows() != t || p.cols() != t {
                return Err(invalid!(
                    "precoder of user {i} is {}x{}, expected {t}x{t}",
                    p.rows(),
                    p.cols()
                ));
            }
            let defect = unitary_defect(p);
            if !(defect <= UNITARY_TOL) {
                return Err(invalid!(
                    "precoder of user {i} is not unitary (defect {defect:e})"
                ));
            }
        }
        Ok(Self { kind, per_user })
    }

    /// The deterministic two-user golden-ratio pair.
    pub fn badr_belfiore(users: usize) -> Result<Self> {
        if users != 2 {
            return Err(invalid!(
                "the Badr-Belfiore precoders are defined for 2 users, got {users}"
            ));
        }
        let (p1, p2) = badr_belfiore_precoders();
        Self::from_matrices(PrecoderKind::BadrBelfiore, vec![p1, p2])
    }

    pub fn sample_haar<R: Rng + ?Sized>(users: usize, rng: &mut R) -> Result<Self> {
        let t = PrecoderKind::Haar.time_extension();
        let per_user = (0..users)
            .map(|_| sample_haar_unitary(t, rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            kind: PrecoderKind::Haar,
            per_user,
        })
    }

    /// A precoder of the given kind; draws from `rng` only for `Haar`.
    pub fn for_kind<R: Rng + ?Sized>(
        kind: PrecoderKind,
        users: usize,
        rng: &mut R,
    ) -> Result<Self> {
        match kind {
            PrecoderKind::None => Ok(Self::none()),
            PrecoderKind::Haar => Self::sample_haar(users, rng),
            PrecoderKind::BadrBelfiore => Self::badr_belfiore(users),
        }
    }

    pub fn kind(&self) -> PrecoderKind {
        self.kind
    }

    pub fn time_extension(&self) -> usize {
        self.kind.time_extension()
    }

    pub fn matrices(&self) -> &[CMat] {
        &self.per_user
    }
}

/// The stacked channel seen by the receiver over `T` channel uses.
///
/// Rows are ordered time-major (`t·N_r + r`), columns user-major
/// (`i·streams_per_user + s`).
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveChannel {
    pub matrix: CMat,
    pub users: usize,
    pub streams_per_user: usize,
    pub time_extension: usize,
}

impl EffectiveChannel {
    pub fn streams(&self) -> usize {
        self.matrix.cols()
    }
}

/// Stacks the users' precoded channels. User `i` contributes the block
/// `P_i ⊗ h_i` (its `N_r x 1` channel repeated over the `T` uses and mixed
/// by `P_i`).
pub fn build_effective_channel(ch: &MacChannel, pre: &Precoder) -> Result<EffectiveChannel> {
    let users = ch.num_users();
    if pre.kind() == PrecoderKind::None {
        return Ok(EffectiveChannel {
            matrix: ch.stacked(),
            users,
            streams_per_user: ch.tx_antennas(),
            time_extension: 1,
        });
    }
    if ch.tx_antennas() != 1 {
        return Err(invalid!(
            "space-time precoding needs single-antenna users, got N_t = {}",
            ch.tx_antennas()
        ));
    }
    if pre.matrices().len() != users {
        return Err(invalid!(
            "{} precoders supplied for {users} users",
            pre.matrices().len()
        ));
    }
    let t = pre.time_extension();
    let nr = ch.rx_antennas();
    let mut m = CMat::zeros(nr * t, users * t);
    for (i, p) in pre.matrices().iter().enumerate() {
        let h = ch.user(i);
        for time in 0..t {
            for s in 0..t {
                for r in 0..nr {
                    m[(time * nr + r, i * t + s)] = p[(time, s)] * h[(r, 0)];
                }
            }
        }
    }
    Ok(EffectiveChannel {
        matrix: m,
        users,
        streams_per_user: t,
        time_extension: t,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum IfMode {
    #[default]
    Plain,
    Sic,
}

/// Decoding order of the integer combinations under SIC.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum SicOrder {
    /// Rows in the order the search returned them.
    #[default]
    Natural,
    /// Best of all orders, for at most [`MAX_EXHAUSTIVE_SIC`] streams.
    Exhaustive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IfResult {
    /// Integer matrix, rows in decoding order.
    pub integer_matrix: GaussianIntMatrix,
    pub per_stream_rate_bits: Vec<f64>,
    /// Rate of each user, `streams_per_user · min_m R_m / T`.
    pub symmetric_rate_bits: f64,
    /// `N` times the per-user rate.
    pub total_rate_bits: f64,
    pub mode: IfMode,
}

/// Lattice with Gram matrix `K = (I + HᴴH)⁻¹`, generated by `R⁻ᴴ` where
/// `I + HᴴH = RᴴR`. `R` comes from a QR factorization of `[H; I]`, which keeps
/// the identity term that forming `I + HᴴH` would round away at high SNR.
pub fn if_lattice(eff: &EffectiveChannel) -> Result<Lattice> {
    let n = eff.streams();
    let h = &eff.matrix;
    let rows = h.rows();
    let stacked = CMat::from_fn(rows + n, n, |i, j| {
        if i < rows {
            h[(i, j)]
        } else if i - rows == j {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let (_, r) = householder_qr(&stacked);
    let lower = CMat::from_fn(n, n, |i, j| {
        if j <= i {
            r[(j, i)].conj()
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Lattice::from_generator(lower_triangular_inverse(&lower))
}

/// `K = (I + HᴴH)⁻¹`.
pub fn if_gram(eff: &EffectiveChannel) -> Result<CMat> {
    Ok(if_lattice(eff)?.gram())
}

fn rate_of_variance(var: f64) -> f64 {
    (-math::log2(var)).max(0.0)
}

/// Squared diagonal of the Cholesky factor of `Ā K Āᴴ`, whose entry
/// `(m, l)` is `a_mᴴ K a_l`. With `V = [G a_1, …, G a_n]` that matrix is
/// `VᴴV = RᴴR` for `V = QR`, so the variances are `|R_mm|²`.
fn sic_variances(lattice: &Lattice, a: &GaussianIntMatrix) -> Vec<f64> {
    let n = a.dim();
    let images: Vec<Vec<C64>> = (0..n).map(|m| lattice.image(&a.row_complex(m))).collect();
    let (_, r) = householder_qr(&CMat::from_fn(n, n, |i, m| images[m][i]));
    (0..n).map(|m| r[(m, m)].norm_sqr()).collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for pos in 0..n {
            let mut p = rest.clone();
            p.insert(pos, n - 1);
            out.push(p);
        }
    }
    out
}

fn min_rate(vars: &[f64]) -> f64 {
    vars.iter()
        .map(|&v| rate_of_variance(v))
        .fold(f64::INFINITY, f64::min)
}

/// Rates for a given integer matrix.
pub fn if_rate_with_matrix(
    eff: &EffectiveChannel,
    a: &GaussianIntMatrix,
    mode: IfMode,
    order: SicOrder,
) -> Result<IfResult> {
    let k = if_lattice(eff)?;
    if a.dim() != k.dim() {
        return Err(invalid!(
            "integer matrix is {0}x{0}, expected {1}x{1}",
            a.dim(),
            k.dim()
        ));
    }
    if !a.is_full_rank() {
        return Err(invalid!("integer matrix must be full rank"));
    }
    let (a, vars) = match mode {
        IfMode::Plain => (a.clone(), a.row_forms(&k)),
        IfMode::Sic => match order {
            SicOrder::Natural => (a.clone(), sic_variances(&k, a)),
            SicOrder::Exhaustive => {
                if a.dim() > MAX_EXHAUSTIVE_SIC {
                    return Err(invalid!(
                        "exhaustive SIC ordering is limited to {MAX_EXHAUSTIVE_SIC} streams, got {}",
                        a.dim()
                    ));
                }
                let mut best: Option<(f64, GaussianIntMatrix, Vec<f64>)> = None;
                for perm in permutations(a.dim()) {
                    let pa = a.permute_rows(&perm);
                    let vars = sic_variances(&k, &pa);
                    let r = min_rate(&vars);
                    if best.as_ref().is_none_or(|(b, _, _)| r > *b) {
                        best = Some((r, pa, vars));
                    }
                }
                let (_, pa, vars) = best.expect("at least one order");
                (pa, vars)
            }
        },
    };
    let per_stream: Vec<f64> = vars.iter().map(|&v| rate_of_variance(v)).collect();
    let per_user = eff.streams_per_user as f64 * min_rate(&vars) / eff.time_extension as f64;
    Ok(IfResult {
        integer_matrix: a,
        per_stream_rate_bits: per_stream,
        symmetric_rate_bits: per_user,
        total_rate_bits: per_user * eff.users as f64,
        mode,
    })
}

/// IF or IF-SIC rates with the integer matrix chosen by LLL.
pub fn if_rate(eff: &EffectiveChannel, mode: IfMode) -> Result<IfResult> {
    let a = lll_search(&if_lattice(eff)?)?;
    if_rate_with_matrix(eff, &a, mode, SicOrder::Natural)
}

/// A receiver whose rate is tallied in the conditioned experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Gaussian codebooks and joint decoding: the symmetric capacity itself.
    Ml,
    IntegerForcing {
        precoder: PrecoderKind,
        mode: IfMode,
    },
}

/// Per-trial total symmetric rate of `scheme` over a scalar `N`-user
/// channel conditioned on sum capacity `cap`. Trial `t` sees the same
/// channel draw for every scheme.
pub fn conditioned_scheme_samples(
    users: usize,
    cap: f64,
    scheme: Scheme,
    cfg: &SimConfig,
) -> Result<Vec<f64>> {
    match scheme {
        Scheme::Ml => conditioned_symmetric_samples(users, cap, cfg),
        Scheme::IntegerForcing { precoder, mode } => {
            cfg.validate()?;
            if !(cap.is_finite() && cap > 0.0) {
                return Err(invalid!(
                    "conditioning capacity must be positive and finite, got {cap}"
                ));
            }
            if precoder == PrecoderKind::BadrBelfiore && users != 2 {
                return Err(invalid!(
                    "the Badr-Belfiore precoders are defined for 2 users, got {users}"
                ));
            }
            run_trials(cfg.trials, cfg.seed, |rng, _| {
                let h = sample_sphere_conditioned(users, cap, rng)?;
                let ch = MacChannel::scalar(&h)?;
                let pre = Precoder::for_kind(precoder, users, rng)?;
                let eff = build_effective_channel(&ch, &pre)?;
                Ok(if_rate(&eff, mode)?.total_rate_bits)
            })
        }
    }
}

/// Empirical `P(R_IF < R | C)` of the total IF (or IF-SIC) rate.
pub fn if_outage_conditioned(
    users: usize,
    cap: f64,
    precoder: PrecoderKind,
    mode: IfMode,
    cfg: &SimConfig,
) -> Result<CdfCurve> {
    let samples =
        conditioned_scheme_samples(users, cap, Scheme::IntegerForcing { precoder, mode }, cfg)?;
    Ok(conditional_curve(&samples, cap, users, cfg))
}

fn check_outage_level(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid!("outage level must lie in (0, 1), got {eps}"));
    }
    Ok(())
}

/// Largest `R` with empirical `P(X < R) <= eps`: the `(⌊eps·n⌋+1)`-th
/// smallest sample.
pub fn empirical_outage_rate(samples: &[f64], eps: f64) -> Result<f64> {
    check_outage_level(eps)?;
    if samples.is_empty() {
        return Err(invalid!("no samples"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = math::floor(eps * sorted.len() as f64) as usize;
    Ok(sorted[m.min(sorted.len() - 1)])
}

/// Largest rate whose conditional outage under joint decoding is at most
/// `eps`. Exact for two users; for more users the union upper bound is
/// inverted, which gives an achievable (conservative) rate.
pub fn ml_outage_rate(users: usize, cap: f64, eps: f64) -> Result<f64> {
    check_outage_level(eps)?;
    if !(cap.is_finite() && cap > 0.0) {
        return Err(invalid!(
            "sum capacity must be positive and finite, got {cap}"
        ));
    }
    match users {
        0 => Err(invalid!("at least one user is required")),
        1 => Ok(cap),
        2 => {
            // 2(2^{R/2} - 1)/(2^C - 1) = eps
            if two_user_cdf(cap, cap)? <= eps {
                return Ok(cap);
            }
            Ok((2.0 * math::log2_1p(eps * math::exp2_m1(cap) / 2.0)).min(cap))
        }
        _ => {
            let upper = |r: f64| scalar_bounds(users, r, cap).map(|b| b.upper_raw);
            if upper(cap)? <= eps {
                return Ok(cap);
            }
            let (mut lo, mut hi) = (0.0, cap);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if upper(mid)? <= eps {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-13 * cap {
                    break;
                }
            }
            Ok(lo)
        }
    }
}

/// Rate at a fixed outage level as a fraction of the sum capacity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FractionPoint {
    pub sum_cap: f64,
    pub rate: f64,
    pub fraction: f64,
}

/// Empirical fraction of `C` achieved by `scheme` at outage `eps`, for each
/// `C` in `caps`.
pub fn fraction_of_capacity(
    users: usize,
    caps: &[f64],
    eps: f64,
    scheme: Scheme,
    cfg: &SimConfig,
) -> Result<Vec<FractionPoint>> {
    check_outage_level(eps)?;
    caps.iter()
        .map(|&cap| {
            let samples = conditioned_scheme_samples(users, cap, scheme, cfg)?;
            let rate = empirical_outage_rate(&samples, eps)?;
            Ok(FractionPoint {
                sum_cap: cap,
                rate,
                fraction: rate / cap,
            })
        })
        .collect()
}

/// Analytic counterpart of [`fraction_of_capacity`] for joint decoding.
pub fn ml_fraction_of_capacity(users: usize, caps: &[f64], eps: f64) -> Result<Vec<FractionPoint>> {
    caps.iter()
        .map(|&cap| {
            let rate = ml_outage_rate(users, cap, eps)?;
            Ok(FractionPoint {
                sum_cap: cap,
                rate,
                fraction: rate / cap,
            })
        })
        .collect()
}

/// `E[C_sym | C]` for two users: `C - 2((2/ln 2)(2^{C/2} - 1) - C)/(2^C - 1)`.
pub fn ml_mean_rate_two_user(cap: f64) -> Result<f64> {
    if !(cap.is_finite() && cap > 0.0) {
        return Err(invalid!(
            "sum capacity must be positive and finite, got {cap}"
        ));
    }
    let integral = 2.0 / core::f64::consts::LN_2 * math::exp2_m1(cap / 2.0) - cap;
    Ok(cap - 2.0 * integral / math::exp2_m1(cap))
}
