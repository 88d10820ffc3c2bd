//! Resolved run parameters and the jobs they drive.
//!
//! A manifest stores the job together with every resolved parameter, so a run
//! can be replayed without consulting any defaults.

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use symcap_core::integer_forcing::{IfMode, PrecoderKind};
use symcap_core::monte_carlo::RateConvention;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PrecoderArg {
    None,
    Haar,
    Bb,
}

impl PrecoderArg {
    pub fn kind(self) -> PrecoderKind {
        match self {
            PrecoderArg::None => PrecoderKind::None,
            PrecoderArg::Haar => PrecoderKind::Haar,
            PrecoderArg::Bb => PrecoderKind::BadrBelfiore,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PrecoderArg::None => "none",
            PrecoderArg::Haar => "haar",
            PrecoderArg::Bb => "bb",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    If,
    IfSic,
}

impl ModeArg {
    pub fn mode(self) -> IfMode {
        match self {
            ModeArg::If => IfMode::Plain,
            ModeArg::IfSic => IfMode::Sic,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ModeArg::If => "if",
            ModeArg::IfSic => "if_sic",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ConventionArg {
    #[default]
    Total,
    PerUser,
}

impl ConventionArg {
    pub fn convention(self) -> RateConvention {
        match self {
            ConventionArg::Total => RateConvention::Total,
            ConventionArg::PerUser => RateConvention::PerUser,
        }
    }
}

/// Closed-form quantities available through `bound`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BoundArg {
    /// Exact two-user conditional CDF.
    #[value(alias = "thm1")]
    TwoUser,
    /// Lower and union upper bound for `N` scalar users.
    #[value(alias = "thm2")]
    Bracket,
    /// Union bound conditioned on the Frobenius capacity.
    #[value(alias = "thm3")]
    FrobeniusUnion,
    /// Two-user SIMO bound.
    #[value(alias = "thm4")]
    Simo,
    /// Outage of one fixed subset of `k` scalar users.
    #[value(alias = "lemma1")]
    Subset,
    /// Outage of one fixed subset of `k` MIMO users, Frobenius-conditioned.
    #[value(alias = "lemma2")]
    MimoSubset,
    /// Probability that the symmetric capacity equals the sum capacity (two users).
    Atom,
}

/// Every parameter a job may read, fully resolved.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub trials: usize,
    pub seed: u64,
    /// User counts; most jobs use only the first.
    pub users: Vec<usize>,
    pub nr: usize,
    pub nt: usize,
    pub sum_cap: f64,
    pub rate: f64,
    /// Subset size for the per-subset quantities.
    pub subset: usize,
    pub snr_db_list: Vec<f64>,
    /// Sum capacities (or sum capacity per user) swept by some figures.
    pub cap_grid: Vec<f64>,
    pub rate_points: usize,
    pub outage_level: f64,
    pub precoders: Vec<PrecoderArg>,
    pub modes: Vec<ModeArg>,
    pub rate_convention: ConventionArg,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            trials: 10_000,
            seed: 0,
            users: vec![2],
            nr: 1,
            nt: 1,
            sum_cap: 2.0,
            rate: 2.0,
            subset: 1,
            snr_db_list: Vec::new(),
            cap_grid: Vec::new(),
            rate_points: 50,
            outage_level: 0.01,
            precoders: vec![PrecoderArg::None],
            modes: vec![ModeArg::If],
            rate_convention: ConventionArg::Total,
        }
    }
}

impl Params {
    pub fn primary_users(&self) -> usize {
        self.users.first().copied().unwrap_or(2)
    }
}

/// Values given on the command line; each replaces the job's default.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub users: Option<Vec<usize>>,
    pub nr: Option<usize>,
    pub nt: Option<usize>,
    pub sum_cap: Option<f64>,
    pub rate: Option<f64>,
    pub subset: Option<usize>,
    pub snr_db_list: Option<Vec<f64>>,
    pub cap_grid: Option<Vec<f64>>,
    pub rate_points: Option<usize>,
    pub outage_level: Option<f64>,
    pub precoder: Option<PrecoderArg>,
    pub mode: Option<ModeArg>,
    pub rate_convention: Option<ConventionArg>,
}

impl Overrides {
    pub fn apply(&self, mut p: Params) -> Params {
        macro_rules! take {
            ($field:ident) => {
                if let Some(v) = &self.$field {
                    p.$field = v.clone();
                }
            };
        }
        take!(trials);
        take!(seed);
        take!(users);
        take!(nr);
        take!(nt);
        take!(sum_cap);
        take!(rate);
        take!(subset);
        take!(snr_db_list);
        take!(cap_grid);
        take!(rate_points);
        take!(outage_level);
        take!(rate_convention);
        if let Some(pre) = self.precoder {
            p.precoders = vec![pre];
        }
        if let Some(mode) = self.mode {
            p.modes = vec![mode];
        }
        p
    }
}

/// What a manifest replays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Job {
    Fig { id: u8 },
    Simulate,
    IfSim,
    Bound { which: BoundArg },
}

impl Job {
    /// Base name of the files the job writes.
    pub fn stem(&self) -> String {
        match self {
            Job::Fig { id } => format!("fig{id}"),
            Job::Simulate => "simulate".into(),
            Job::IfSim => "if-sim".into(),
            Job::Bound { .. } => "bound".into(),
        }
    }

    pub fn command_line(&self) -> String {
        match self {
            Job::Fig { id } => format!("fig {id}"),
            Job::Simulate => "simulate".into(),
            Job::IfSim => "if-sim".into(),
            Job::Bound { which } => {
                let name = which
                    .to_possible_value()
                    .map(|v| v.get_name().to_owned())
                    .unwrap_or_default();
                format!("bound {name}")
            }
        }
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Integer-step range `lo..=hi` as floats.
pub fn steps(lo: i32, hi: i32, step: usize) -> Vec<f64> {
    (lo..=hi).step_by(step).map(f64::from).collect()
}
