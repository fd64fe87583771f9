//! Standard normal density and distribution function.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Standard normal density.
pub fn normal_pdf(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF, `0.5 * erfc(-t / sqrt 2)`.
///
/// Going through `erfc` keeps full relative accuracy in the lower tail,
/// where `0.5 * (1 + erf)` would cancel.
pub fn normal_cdf(t: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    0.5 * libm::erfc(-t * FRAC_1_SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn center_and_limits() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert_eq!(normal_cdf(f64::INFINITY), 1.0);
        assert_eq!(normal_cdf(f64::NEG_INFINITY), 0.0);
        assert!((normal_cdf(40.0) - 1.0).abs() < 1e-300);
        assert!(normal_cdf(-40.0) < 1e-300);
    }

    #[test]
    fn value_at_one() {
        assert!((normal_cdf(1.0) - 0.8413447460685429).abs() < 1e-15);
    }

    #[test]
    fn symmetry() {
        for k in 0..=160 {
            let t = k as f64 * 0.05;
            assert!((normal_cdf(-t) - (1.0 - normal_cdf(t))).abs() < 1e-15);
        }
    }

    #[test]
    fn density_peak() {
        assert!((normal_pdf(0.0) - 0.3989422804014327).abs() < 1e-16);
    }
}
