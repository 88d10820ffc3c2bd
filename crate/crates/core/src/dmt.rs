//! Diversity-multiplexing tradeoff curves of the Rayleigh-fading MIMO channel
//! and of the symmetric-rate MIMO-MAC.

use alloc::vec::Vec;

use crate::error::invalid;
use crate::math;
use crate::Result;

const EDGE_SLACK: f64 = 1e-12;

/// Piecewise-linear curve through `(multiplexing gain, diversity)` breakpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct DmtCurve {
    breakpoints: Vec<(f64, f64)>,
}

impl DmtCurve {
    /// Breakpoints must have strictly increasing `r` and non-increasing `d`.
    pub fn new(breakpoints: Vec<(f64, f64)>) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(invalid!("a DMT curve needs at least one breakpoint"));
        }
        for w in breakpoints.windows(2) {
            if !(w[1].0 > w[0].0) || w[1].1 > w[0].1 {
                return Err(invalid!(
                    "DMT breakpoints must have increasing r and non-increasing d"
                ));
            }
        }
        if breakpoints.iter().any(|&(r, d)| r < 0.0 || d < 0.0) {
            return Err(invalid!("DMT breakpoints must be non-negative"));
        }
        Ok(Self { breakpoints })
    }

    /// `d*_{N_t,N_r}` through its integer points `(k, (N_t-k)(N_r-k))`.
    pub fn single_user(tx: usize, rx: usize) -> Self {
        let pts = (0..=tx.min(rx))
            .map(|k| (k as f64, ((tx - k) * (rx - k)) as f64))
            .collect();
        Self { breakpoints: pts }
    }

    /// Symmetric-rate MAC curve: single-user branch up to the threshold
    /// `min(N_t, N_r/(N+1))`, antenna-pooling branch `d*_{N·N_t,N_r}(N·r)`
    /// beyond it.
    pub fn symmetric_mac(users: usize, tx: usize, rx: usize) -> Result<Self> {
        check_counts(users, tx, rx)?;
        let thr = branch_threshold(users, tx, rx);
        let r_max = max_symmetric_gain(users, tx, rx);
        let mut rs: Vec<f64> = Vec::new();
        let mut k = 0usize;
        while (k as f64) < thr {
            rs.push(k as f64);
            k += 1;
        }
        rs.push(thr);
        let mut j = 0usize;
        loop {
            let r = j as f64 / users as f64;
            if r > r_max + EDGE_SLACK {
                break;
            }
            if r > thr + EDGE_SLACK {
                rs.push(r);
            }
            j += 1;
        }
        if rs.last().is_some_and(|&r| r < r_max - EDGE_SLACK) {
            rs.push(r_max);
        }
        let pts = rs
            .into_iter()
            .map(|r| {
                let d = dmt_symmetric_mac(users, tx, rx, r).expect("r within the curve's domain");
                (r, d)
            })
            .collect();
        Self::new(pts)
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    /// Linear interpolation; `None` outside the curve's range.
    pub fn eval(&self, r: f64) -> Option<f64> {
        let first = self.breakpoints[0];
        let last = *self.breakpoints.last().expect("non-empty");
        if r < first.0 - EDGE_SLACK || r > last.0 + EDGE_SLACK {
            return None;
        }
        if r <= first.0 {
            return Some(first.1);
        }
        for w in self.breakpoints.windows(2) {
            let ((r0, d0), (r1, d1)) = (w[0], w[1]);
            if r <= r1 {
                return Some(d0 + (d1 - d0) * (r - r0) / (r1 - r0));
            }
        }
        Some(last.1)
    }
}

fn check_counts(users: usize, tx: usize, rx: usize) -> Result<()> {
    if users == 0 || tx == 0 || rx == 0 {
        return Err(invalid!("users and antenna counts must be at least 1"));
    }
    Ok(())
}

fn branch_threshold(users: usize, tx: usize, rx: usize) -> f64 {
    (tx as f64).min(rx as f64 / (users + 1) as f64)
}

/// Largest per-user multiplexing gain with a defined symmetric DMT.
pub fn max_symmetric_gain(users: usize, tx: usize, rx: usize) -> f64 {
    (tx as f64).min(rx as f64 / users as f64)
}

/// Single-user MIMO DMT `d*_{N_t,N_r}(r)`, interpolating `(N_t-k)(N_r-k)`
/// linearly between integers.
pub fn dmt_single_user(tx: usize, rx: usize, r: f64) -> Result<f64> {
    if tx == 0 || rx == 0 {
        return Err(invalid!("antenna counts must be at least 1"));
    }
    let r_max = tx.min(rx) as f64;
    if !(r >= 0.0 && r <= r_max + EDGE_SLACK) {
        return Err(invalid!("multiplexing gain {r} outside [0, {r_max}]"));
    }
    let r = r.min(r_max);
    let at = |k: f64| (tx as f64 - k) * (rx as f64 - k);
    let k0 = math::floor(r);
    if k0 >= r_max {
        return Ok(at(r_max));
    }
    let frac = r - k0;
    Ok(at(k0) + (at(k0 + 1.0) - at(k0)) * frac)
}

/// Symmetric-rate MAC DMT `d*_sym(r)`, `r` per user.
pub fn dmt_symmetric_mac(users: usize, tx: usize, rx: usize, r: f64) -> Result<f64> {
    check_counts(users, tx, rx)?;
    let r_max = max_symmetric_gain(users, tx, rx);
    if !(r >= 0.0 && r <= r_max + EDGE_SLACK) {
        return Err(invalid!("multiplexing gain {r} outside [0, {r_max}]"));
    }
    let r = r.min(r_max);
    if r <= branch_threshold(users, tx, rx) {
        dmt_single_user(tx, rx, r)
    } else {
        dmt_single_user(users * tx, rx, users as f64 * r)
    }
}
