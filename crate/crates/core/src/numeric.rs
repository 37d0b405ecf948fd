//! Small floating-point helpers that must also work without `std`.

use alloc::vec::Vec;

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
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
pub(crate) fn fabs(x: f64) -> f64 {
    libm::fabs(x)
}

/// `log(sum(exp(v)))` with the maximum shifted out. Empty input gives `-inf`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        return max;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = values.iter().map(|v| exp(v - max)).sum();
    max + ln(sum)
}

/// `log(mean e^{l_i})`, shifted by the maximum so equal inputs come back unchanged.
pub(crate) fn log_mean_exp(logs: &[f64]) -> f64 {
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return top;
    }
    top + ln(logs.iter().map(|l| exp(l - top)).sum::<f64>() / logs.len() as f64)
}

/// Log-sum-exp over selected entries of `values`, in the order given.
pub(crate) fn log_sum_exp_of(values: &[f64], members: &[usize]) -> f64 {
    let picked: Vec<f64> = members.iter().map(|&i| values[i]).collect();
    log_sum_exp(&picked)
}

/// Ordinary least-squares slope of `ys` against `xs`.
///
/// `ys` is centred on its first entry before fitting so that a constant series
/// gives a slope of exactly zero.
pub(crate) fn ls_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 || xs.len() != ys.len() {
        return None;
    }
    let y0 = ys[0];
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().map(|y| y - y0).sum::<f64>() / k;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mx;
        sxy += dx * ((y - y0) - my);
        sxx += dx * dx;
    }
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// `a <= b` up to a relative tolerance on the larger magnitude.
#[inline]
pub(crate) fn le_rel(a: f64, b: f64, rel: f64) -> bool {
    a <= b + rel * fabs(a).max(fabs(b)).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lse_matches_naive_on_small_values() {
        let v = [0.1, -2.0, 1.5];
        let naive = ln(v.iter().map(|x| exp(*x)).sum::<f64>());
        assert!((log_sum_exp(&v) - naive).abs() < 1e-14);
    }

    #[test]
    fn lse_survives_large_exponents() {
        let v = [1000.0, 1000.0];
        assert!((log_sum_exp(&v) - (1000.0 + ln(2.0))).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn slope_of_constant_is_zero() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let c = ln(2.0);
        assert_eq!(ls_slope(&xs, &[c, c, c, c]), Some(0.0));
        let s = ls_slope(&xs, &[1.0, 3.0, 5.0, 7.0]).unwrap();
        assert!((s - 2.0).abs() < 1e-14);
        assert_eq!(ls_slope(&[1.0], &[1.0]), None);
    }
}
