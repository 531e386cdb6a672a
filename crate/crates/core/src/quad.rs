//! Adaptive Gauss–Kronrod quadrature.
//!
//! A 15-point Kronrod rule with embedded 7-point Gauss rule drives a
//! worst-interval-first bisection loop. This is the workhorse behind
//! mollifier normalization, Laplace-transform oracles, and the integral
//! representation of the Mittag-Leffler function on the negative axis.

use crate::error::{Error, Result};

// 15-point Kronrod abscissae on [-1, 1] (positive half; rule is symmetric).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

// Kronrod weights matching XGK.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// 7-point Gauss weights; the Gauss nodes are XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_69,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

/// Result of a quadrature: the estimate and an error bound from the
/// Gauss/Kronrod difference.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, Copy)]
struct Interval {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    if !fc.is_finite() {
        return Err(Error::Numeric(format!(
            "quad: integrand non-finite at {center}"
        )));
    }
    let mut resk = WGK[7] * fc;
    let mut resg = WG[3] * fc;
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        if !f1.is_finite() || !f2.is_finite() {
            return Err(Error::Numeric(format!(
                "quad: integrand non-finite near {center}"
            )));
        }
        let fsum = f1 + f2;
        resk += WGK[j] * fsum;
        if j % 2 == 1 {
            resg += WG[j / 2] * fsum;
        }
    }
    Ok((resk * half, (resk - resg).abs() * half))
}

/// Integrate `f` over `[a, b]` until the summed Kronrod error estimate drops
/// below `max(abs_tol, rel_tol * |integral|)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<QuadResult> {
    const MAX_INTERVALS: usize = 4000;
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::InvalidArgument(format!(
            "quad: bad interval [{a}, {b}]"
        )));
    }
    let (v, e) = gk15(&f, a, b)?;
    let mut intervals = vec![Interval {
        a,
        b,
        value: v,
        error: e,
    }];
    loop {
        let total_value: f64 = intervals.iter().map(|i| i.value).sum();
        let total_error: f64 = intervals.iter().map(|i| i.error).sum();
        let target = abs_tol.max(rel_tol * total_value.abs());
        if total_error <= target {
            return Ok(QuadResult {
                value: total_value,
                abs_error: total_error,
            });
        }
        if intervals.len() >= MAX_INTERVALS {
            return Err(Error::Numeric(format!(
                "quad: error {total_error:.3e} above tolerance {target:.3e} after {MAX_INTERVALS} intervals"
            )));
        }
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap();
        let Interval { a, b, .. } = intervals.swap_remove(worst);
        let mid = 0.5 * (a + b);
        let (v1, e1) = gk15(&f, a, mid)?;
        let (v2, e2) = gk15(&f, mid, b)?;
        intervals.push(Interval {
            a,
            b: mid,
            value: v1,
            error: e1,
        });
        intervals.push(Interval {
            a: mid,
            b,
            value: v2,
            error: e2,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        // GK15 integrates low-degree polynomials exactly on one panel.
        let r = integrate(|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-14, 1e-14).unwrap();
        let exact = |x: f64| 0.25 * x.powi(4) - x * x + x;
        assert!((r.value - (exact(3.0) - exact(-1.0))).abs() < 1e-12);
    }

    #[test]
    fn gaussian_tail() {
        let r = integrate(|x| (-x * x).exp(), 0.0, 20.0, 1e-13, 1e-13).unwrap();
        assert!((r.value - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_needs_subdivision() {
        let r = integrate(|x| (40.0 * x).sin(), 0.0, 1.0, 1e-12, 1e-12).unwrap();
        let exact = (1.0 - (40.0_f64).cos()) / 40.0;
        assert!((r.value - exact).abs() < 1e-11);
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        assert!(integrate(|x| 1.0 / x, -1.0, 1.0, 1e-10, 1e-10).is_err());
    }

    #[test]
    fn bad_interval_is_an_error() {
        assert!(integrate(|x| x, 1.0, 1.0, 1e-10, 1e-10).is_err());
    }
}
