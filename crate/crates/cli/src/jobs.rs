//! Figure generators and the `simulate`, `if-sim` and `bound` jobs.

use anyhow::bail;
use serde_json::json;
use symcap_core::bounds::{
    atom_probability, mimo_p_out_k, mimo_union_bound, mimo_union_bound_raw, p_out_k, scalar_bounds,
    two_user_cdf, two_user_simo_bound, ScenarioDims,
};
use symcap_core::dmt::DmtCurve;
use symcap_core::integer_forcing::{
    conditioned_scheme_samples, empirical_outage_rate, ml_mean_rate_two_user, ml_outage_rate,
    PrecoderKind, Scheme,
};
use symcap_core::monte_carlo::{
    averaged_bound_vs_snr, conditional_cdf_mimo_frobenius, conditional_cdf_scalar,
    conditional_curve, conditional_subset_cdf, conditioned_symmetric_samples, outage_vs_snr,
    BoundKind, MeanEstimate, SimConfig,
};

use crate::output::Row;
use crate::params::{linspace, steps, BoundArg, Job, ModeArg, Params, PrecoderArg};

pub const FIGURE_IDS: std::ops::RangeInclusive<u8> = 1..=10;

/// What a job produces.
#[derive(Clone, Debug, PartialEq)]
pub enum Output {
    Rows(Vec<Row>),
    /// A single result: JSON value plus a one-line human summary.
    Value(serde_json::Value, String),
}

/// Default parameters of a job.
pub fn defaults(job: &Job) -> anyhow::Result<Params> {
    let base = Params::default();
    let p = match *job {
        Job::Fig { id } => figure_defaults(id)?,
        Job::Simulate => Params {
            users: vec![2],
            sum_cap: 2.0,
            rate: 3.0,
            ..base
        },
        Job::IfSim => Params {
            users: vec![2],
            sum_cap: 10.0,
            rate_points: 41,
            ..base
        },
        Job::Bound { .. } => Params { trials: 1, ..base },
    };
    Ok(p)
}

fn figure_defaults(id: u8) -> anyhow::Result<Params> {
    let base = Params::default();
    let all_precoders = vec![PrecoderArg::None, PrecoderArg::Haar, PrecoderArg::Bb];
    let both_modes = vec![ModeArg::If, ModeArg::IfSic];
    let p = match id {
        1 => Params {
            trials: 1,
            users: vec![2],
            ..base
        },
        2 => Params {
            trials: 100_000,
            users: vec![2],
            sum_cap: 2.0,
            rate_points: 50,
            ..base
        },
        3 => Params {
            trials: 100_000,
            users: vec![4],
            sum_cap: 8.0,
            rate_points: 20,
            ..base
        },
        4 => Params {
            trials: 100_000,
            users: vec![4],
            sum_cap: 8.0,
            rate_points: 50,
            ..base
        },
        5 => Params {
            users: vec![2],
            nr: 3,
            nt: 2,
            rate: 3.0,
            snr_db_list: steps(-10, 20, 1),
            ..base
        },
        // below about -8 dB both bounds are identically 1
        6 => Params {
            users: vec![2],
            nr: 6,
            nt: 1,
            rate: 3.0,
            snr_db_list: steps(-6, 20, 1),
            ..base
        },
        7 => Params {
            users: vec![2],
            sum_cap: 10.0,
            rate_points: 41,
            precoders: all_precoders,
            modes: both_modes,
            ..base
        },
        8 => Params {
            users: vec![2],
            sum_cap: 10.0,
            rate_points: 50,
            precoders: vec![PrecoderArg::None, PrecoderArg::Bb],
            modes: both_modes,
            ..base
        },
        9 => Params {
            users: vec![2, 4, 6],
            cap_grid: steps(1, 10, 1),
            outage_level: 0.01,
            precoders: vec![PrecoderArg::None],
            modes: vec![ModeArg::IfSic],
            ..base
        },
        10 => Params {
            users: vec![2],
            cap_grid: steps(2, 20, 2),
            precoders: all_precoders,
            modes: both_modes,
            ..base
        },
        _ => bail!(usage(format!("unknown figure id {id}; expected 1 to 10"))),
    };
    Ok(p)
}

/// Marks an error as a usage error for exit-code purposes.
pub fn usage(msg: String) -> symcap_core::Error {
    symcap_core::Error::InvalidParameter(msg)
}

fn sim_config(p: &Params, rate_grid: Vec<f64>) -> SimConfig {
    SimConfig::new(p.trials, p.seed)
        .with_rate_grid(rate_grid)
        .with_snr_grid_db(p.snr_db_list.clone())
        .with_rate_convention(p.rate_convention.convention())
}

/// Rate grid on `[0, cap]` in the units of the selected convention.
fn rate_grid(p: &Params, cap: f64, users: usize) -> Vec<f64> {
    let top = cap / p.rate_convention.convention().threshold(1.0, users);
    linspace(0.0, top, p.rate_points)
}

fn threshold(p: &Params, rate: f64, users: usize) -> f64 {
    p.rate_convention.convention().threshold(rate, users)
}

pub fn run(job: &Job, p: &Params) -> anyhow::Result<Output> {
    match *job {
        Job::Fig { id } => figure(id, p).map(Output::Rows),
        Job::Simulate => simulate(p).map(Output::Rows),
        Job::IfSim => if_sim(p).map(Output::Rows),
        Job::Bound { which } => bound(which, p),
    }
}

pub fn figure(id: u8, p: &Params) -> anyhow::Result<Vec<Row>> {
    match id {
        1 => fig_dmt(p),
        2 => fig_conditional_density(p),
        3 => fig_subsets(p),
        4 => fig_bracket(p),
        5 | 6 => snr_sweep(p),
        7 => fig_if_cdf(p),
        8 => fig_if_pdf(p),
        9 => fig_fraction(p),
        10 => fig_mean_rate(p),
        _ => bail!(usage(format!("unknown figure id {id}; expected 1 to 10"))),
    }
}

fn fig_dmt(p: &Params) -> anyhow::Result<Vec<Row>> {
    let users = p.primary_users();
    let mut rows = Vec::new();
    for &(r, d) in DmtCurve::symmetric_mac(users, p.nt, p.nr)?.breakpoints() {
        rows.push(Row::exact("symmetric_mac", r, d));
    }
    for &(r, d) in DmtCurve::single_user(p.nt, p.nr).breakpoints() {
        rows.push(Row::exact("single_user", r, d));
    }
    Ok(rows)
}

/// Histogram density of the samples strictly below `cap`, normalised by the
/// total count so that the atom keeps the remaining mass.
fn density_rows(curve: &str, samples: &[f64], cap: f64, bins: usize) -> Vec<Row> {
    let n = samples.len() as f64;
    let width = cap / bins as f64;
    let mut counts = vec![0usize; bins];
    for &s in samples {
        if s < cap {
            let b = ((s / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
    }
    counts
        .iter()
        .enumerate()
        .map(|(b, &c)| {
            let q = c as f64 / n;
            Row::estimate(
                curve,
                (b as f64 + 0.5) * width,
                q / width,
                (q * (1.0 - q) / n).sqrt() / width,
            )
        })
        .collect()
}

/// Density of `C_sym` given `C` for two users: `ln 2 · 2^{R/2} / (2^C - 1)`.
fn two_user_density(rate: f64, cap: f64) -> f64 {
    std::f64::consts::LN_2 * (rate / 2.0).exp2() / (cap.exp2() - 1.0)
}

fn fig_conditional_density(p: &Params) -> anyhow::Result<Vec<Row>> {
    let users = p.primary_users();
    let cap = p.sum_cap;
    let cfg = sim_config(p, vec![]);
    let samples = conditioned_symmetric_samples(users, cap, &cfg)?;
    let bins = p.rate_points.max(1);
    let mut rows = density_rows("empirical_density", &samples, cap, bins);
    let curve = conditional_curve(&samples, cap, users, &cfg);
    rows.push(Row::estimate(
        "empirical_atom",
        cap,
        curve.atom.p_hat,
        curve.atom.stderr,
    ));
    if users == 2 {
        for r in linspace(0.0, cap, 201).into_iter().take(200) {
            rows.push(Row::exact("density", r, two_user_density(r, cap)));
        }
        rows.push(Row::exact("atom", cap, atom_probability(cap)?));
        // two example capacity regions with this sum capacity
        let total = cap.exp2() - 1.0;
        for (label, share) in [("region_balanced", 0.5), ("region_bottleneck", 0.07)] {
            let (g1, g2) = (share * total, (1.0 - share) * total);
            let (c1, c2) = ((1.0 + g1).log2(), (1.0 + g2).log2());
            for (x, y) in [
                (0.0, 0.0),
                (c1, 0.0),
                (c1, cap - c1),
                (cap - c2, c2),
                (0.0, c2),
                (0.0, 0.0),
            ] {
                rows.push(Row::exact(label, x, y));
            }
        }
        rows.push(Row::exact("symmetric_line", 0.0, 0.0));
        rows.push(Row::exact("symmetric_line", cap / 2.0, cap / 2.0));
    }
    Ok(rows)
}

fn fig_subsets(p: &Params) -> anyhow::Result<Vec<Row>> {
    let users = p.primary_users();
    let cap = p.sum_cap;
    let dims = ScenarioDims::scalar(users)?;
    let grid = rate_grid(p, cap, users);
    let cfg = sim_config(p, grid.clone());
    let mut rows = Vec::new();
    for k in 1..users {
        for r in linspace(0.0, grid.last().copied().unwrap_or(cap), 101) {
            rows.push(Row::exact(
                &format!("subset_k{k}"),
                r,
                p_out_k(k, users, threshold(p, r, users), cap)?,
            ));
        }
        for e in conditional_subset_cdf(dims, k, cap, &cfg)? {
            rows.push(Row::estimate(
                &format!("empirical_k{k}"),
                e.point,
                e.p_hat,
                e.stderr,
            ));
        }
    }
    Ok(rows)
}

fn fig_bracket(p: &Params) -> anyhow::Result<Vec<Row>> {
    let users = p.primary_users();
    let cap = p.sum_cap;
    let grid = rate_grid(p, cap, users);
    let cfg = sim_config(p, grid.clone());
    let curve = conditional_cdf_scalar(users, cap, &cfg)?;
    let mut rows: Vec<Row> = curve
        .points
        .iter()
        .map(|e| Row::estimate("empirical", e.point, e.p_hat, e.stderr))
        .collect();
    for &r in &grid {
        let b = scalar_bounds(users, threshold(p, r, users), cap)?;
        rows.push(Row::exact("lower_bound", r, b.lower));
        rows.push(Row::exact("upper_bound", r, b.upper));
    }
    Ok(rows)
}

fn mean_rows(curve: &str, est: &[MeanEstimate]) -> Vec<Row> {
    est.iter()
        .map(|e| Row::estimate(curve, e.point, e.mean, e.stderr))
        .collect()
}

fn snr_sweep(p: &Params) -> anyhow::Result<Vec<Row>> {
    let dims = ScenarioDims::new(p.primary_users(), p.nt, p.nr)?;
    let cfg = sim_config(p, vec![]);
    let mut rows: Vec<Row> = outage_vs_snr(dims, p.rate, &cfg)?
        .iter()
        .map(|e| Row::estimate("empirical", e.point, e.p_hat, e.stderr))
        .collect();
    rows.extend(mean_rows(
        "frobenius_union_bound",
        &averaged_bound_vs_snr(dims, p.rate, BoundKind::FrobeniusUnion, &cfg)?,
    ));
    if dims.users == 2 && dims.tx == 1 {
        rows.extend(mean_rows(
            "simo_bound",
            &averaged_bound_vs_snr(dims, p.rate, BoundKind::TwoUserSimo, &cfg)?,
        ));
    }
    Ok(rows)
}

/// IF variants requested by `p` that make sense for `users`.
fn if_variants(p: &Params, users: usize) -> Vec<(PrecoderArg, ModeArg)> {
    let mut out = Vec::new();
    for &mode in &p.modes {
        for &pre in &p.precoders {
            if pre.kind() == PrecoderKind::BadrBelfiore && users != 2 {
                continue;
            }
            out.push((pre, mode));
        }
    }
    out
}

fn variant_label(pre: PrecoderArg, mode: ModeArg) -> String {
    format!("{}_{}", mode.label(), pre.label())
}

fn if_cdf_rows(p: &Params) -> anyhow::Result<Vec<Row>> {
    let users = p.primary_users();
    let cap = p.sum_cap;
    let grid = rate_grid(p, cap, users);
    let cfg = sim_config(p, grid.clone());
    let mut rows = Vec::new();
    if users == 2 {
        for &r in &grid {
            rows.push(Row::exact(
                "ml_exact",
                r,
                two_user_cdf(threshold(p, r, users).min(cap), cap)?,
            ));
        }
    }
    let ml = conditional_cdf_scalar(users, cap, &cfg)?;
    rows.extend(
        ml.points
            .iter()
            .map(|e| Row::estimate("ml_empirical", e.point, e.p_hat, e.stderr)),
    );
    for (pre, mode) in if_variants(p, users) {
        let scheme = Scheme::IntegerForcing {
            precoder: pre.kind(),
            mode: mode.mode(),
        };
        let samples = conditioned_scheme_samples(users, cap, scheme, &cfg)?;
        let curve = conditional_curve(&samples, cap, users, &cfg);
        let label = variant_label(pre, mode);
        rows.extend(
            curve
                .points
                .iter()
                .map(|e| Row::estimate(&label, e.point, e.p_hat, e.stderr)),
        );
    }
    Ok(rows)
}

fn fig_if_cdf(p: &Params) -> anyhow::Result<Vec<Row>> {
    if_cdf_rows(p)
}

fn fig_if_pdf(p: &Params) -> anyhow::Result<Vec<Row>> {
    let users = p.primary_users();
    let cap = p.sum_cap;
    let cfg = sim_config(p, vec![]);
    let bins = p.rate_points.max(1);
    let mut rows = Vec::new();
    if users == 2 {
        for r in linspace(0.0, cap, 201).into_iter().take(200) {
            rows.push(Row::exact("ml_density", r, two_user_density(r, cap)));
        }
        rows.push(Row::exact("ml_atom", cap, atom_probability(cap)?));
    }
    for (pre, mode) in if_variants(p, users) {
        let scheme = Scheme::IntegerForcing {
            precoder: pre.kind(),
            mode: mode.mode(),
        };
        let samples = conditioned_scheme_samples(users, cap, scheme, &cfg)?;
        rows.extend(density_rows(&variant_label(pre, mode), &samples, cap, bins));
    }
    Ok(rows)
}

fn fig_fraction(p: &Params) -> anyhow::Result<Vec<Row>> {
    let cfg = sim_config(p, vec![]);
    let eps = p.outage_level;
    let mut rows = Vec::new();
    for &users in &p.users {
        for &per_user in &p.cap_grid {
            let cap = per_user * users as f64;
            let analytic = ml_outage_rate(users, cap, eps)?;
            rows.push(Row::exact(
                &format!("ml_bound_n{users}"),
                per_user,
                analytic / cap,
            ));
            let ml = conditioned_scheme_samples(users, cap, Scheme::Ml, &cfg)?;
            rows.push(Row::exact(
                &format!("ml_empirical_n{users}"),
                per_user,
                empirical_outage_rate(&ml, eps)? / cap,
            ));
            for (pre, mode) in if_variants(p, users) {
                let scheme = Scheme::IntegerForcing {
                    precoder: pre.kind(),
                    mode: mode.mode(),
                };
                let samples = conditioned_scheme_samples(users, cap, scheme, &cfg)?;
                rows.push(Row::exact(
                    &format!("{}_n{users}", variant_label(pre, mode)),
                    per_user,
                    empirical_outage_rate(&samples, eps)? / cap,
                ));
            }
        }
    }
    Ok(rows)
}

fn fig_mean_rate(p: &Params) -> anyhow::Result<Vec<Row>> {
    let users = p.primary_users();
    let cfg = sim_config(p, vec![]);
    let mut rows = Vec::new();
    for &cap in &p.cap_grid {
        if users == 2 {
            rows.push(Row::exact(
                "ml_exact",
                cap,
                ml_mean_rate_two_user(cap)? / cap,
            ));
        }
        let mut schemes = vec![("ml_empirical".to_owned(), Scheme::Ml)];
        for (pre, mode) in if_variants(p, users) {
            schemes.push((
                variant_label(pre, mode),
                Scheme::IntegerForcing {
                    precoder: pre.kind(),
                    mode: mode.mode(),
                },
            ));
        }
        for (label, scheme) in schemes {
            let samples = conditioned_scheme_samples(users, cap, scheme, &cfg)?;
            let m = MeanEstimate::from_samples(cap, &samples);
            rows.push(Row::estimate(&label, cap, m.mean / cap, m.stderr / cap));
        }
    }
    Ok(rows)
}

fn simulate(p: &Params) -> anyhow::Result<Vec<Row>> {
    if !p.snr_db_list.is_empty() {
        return snr_sweep(p);
    }
    let users = p.primary_users();
    let cap = p.sum_cap;
    let dims = ScenarioDims::new(users, p.nt, p.nr)?;
    let grid = rate_grid(p, cap, users);
    let cfg = sim_config(p, grid.clone());
    let mut rows = Vec::new();
    if dims.is_scalar() {
        let curve = conditional_cdf_scalar(users, cap, &cfg)?;
        rows.extend(
            curve
                .points
                .iter()
                .map(|e| Row::estimate("empirical", e.point, e.p_hat, e.stderr)),
        );
        rows.push(Row::estimate(
            "empirical_atom",
            cap,
            curve.atom.p_hat,
            curve.atom.stderr,
        ));
        if users >= 2 {
            for &r in &grid {
                let b = scalar_bounds(users, threshold(p, r, users), cap)?;
                rows.push(Row::exact("lower_bound", r, b.lower));
                rows.push(Row::exact("upper_bound", r, b.upper));
            }
        }
    } else {
        let curve = conditional_cdf_mimo_frobenius(dims, cap, &cfg)?;
        rows.extend(
            curve
                .points
                .iter()
                .map(|e| Row::estimate("empirical", e.point, e.p_hat, e.stderr)),
        );
        for &r in &grid {
            rows.push(Row::exact(
                "frobenius_union_bound",
                r,
                mimo_union_bound(dims, threshold(p, r, users), cap)?,
            ));
        }
    }
    Ok(rows)
}

fn if_sim(p: &Params) -> anyhow::Result<Vec<Row>> {
    if p.nt != 1 || p.nr != 1 {
        bail!(usage(
            "if-sim works on single-antenna users and receiver".into()
        ));
    }
    if_cdf_rows(p)
}

fn bound(which: BoundArg, p: &Params) -> anyhow::Result<Output> {
    let users = p.primary_users();
    let cap = p.sum_cap;
    let r = threshold(p, p.rate, users);
    let dims = || ScenarioDims::new(users, p.nt, p.nr);
    let (value, summary) = match which {
        BoundArg::TwoUser => {
            let v = two_user_cdf(r, cap)?;
            (json!(v), format!("{v:.6}"))
        }
        BoundArg::Bracket => {
            let b = scalar_bounds(users, r, cap)?;
            (
                json!({ "lower": b.lower, "upper": b.upper, "upper_raw": b.upper_raw }),
                format!(
                    "lower={:.6} upper={:.6} upper_raw={:.6}",
                    b.lower, b.upper, b.upper_raw
                ),
            )
        }
        BoundArg::FrobeniusUnion => {
            let d = dims()?;
            let v = mimo_union_bound(d, r, cap)?;
            let raw = mimo_union_bound_raw(d, r, cap)?;
            (json!({ "bound": v, "raw": raw }), format!("{v:.6}"))
        }
        BoundArg::Simo => {
            let v = two_user_simo_bound(r, cap)?;
            (json!(v), format!("{v:.6}"))
        }
        BoundArg::Subset => {
            let v = p_out_k(p.subset, users, r, cap)?;
            (json!(v), format!("{v:.6}"))
        }
        BoundArg::MimoSubset => {
            let v = mimo_p_out_k(p.subset, dims()?, r, cap)?;
            (json!(v), format!("{v:.6}"))
        }
        BoundArg::Atom => {
            let v = atom_probability(cap)?;
            (json!(v), format!("{v:.6}"))
        }
    };
    Ok(Output::Value(value, summary))
}
