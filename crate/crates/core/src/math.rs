//! Thin wrappers over `libm` so the same code builds with and without `std`.

use core::f64::consts::LN_2;

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub(crate) fn log2(x: f64) -> f64 {
    libm::log2(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn exp2(x: f64) -> f64 {
    libm::exp2(x)
}

#[inline]
pub(crate) fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub(crate) fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub(crate) fn tanh(x: f64) -> f64 {
    libm::tanh(x)
}

#[inline]
pub(crate) fn lgamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `log2(1 + x)` without cancellation for small `x`.
#[inline]
pub(crate) fn log2_1p(x: f64) -> f64 {
    ln_1p(x) / LN_2
}

/// `2^a - 1` without cancellation for small `a`.
#[inline]
pub(crate) fn exp2_m1(a: f64) -> f64 {
    libm::expm1(a * LN_2)
}

/// `(2^a - 1) / (2^c - 1)` for `0 <= a <= c`, `c > 0`, stable for both
/// tiny arguments and `c` beyond the `f64` range of `2^c`.
pub(crate) fn exp2_m1_ratio(a: f64, c: f64) -> f64 {
    if a <= 0.0 {
        return 0.0;
    }
    if c <= 1.0 {
        exp2_m1(a) / exp2_m1(c)
    } else {
        // 2^(a-c) * (1 - 2^-a) / (1 - 2^-c)
        exp((a - c) * LN_2) * libm::expm1(-a * LN_2) / libm::expm1(-c * LN_2)
    }
}

/// Binomial coefficient as a float; exact for the small arguments used here.
pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * f64::from(n - i) / f64::from(i + 1);
    }
    round(acc)
}
