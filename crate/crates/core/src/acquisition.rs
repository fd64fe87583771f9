//! Aspiration levels and the two acquisition criteria.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::{EvaluationHistory, ModelParameters, SurrogatePosterior};
use crate::normal::{normal_cdf, normal_pdf};

pub const DEFAULT_EPSILON: f64 = 0.1;

/// A candidate is degenerate when its conditional standard deviation is at
/// most this fraction of the prior standard deviation.
pub const DEGENERATE_REL_SD: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AspirationLevel {
    pub y_on: f64,
    pub epsilon: f64,
}

/// `y_on = min_i y_i - epsilon * sigma`, with `sigma` from the active estimator.
pub fn aspiration(
    history: &EvaluationHistory,
    params: &ModelParameters,
    epsilon: f64,
) -> Result<AspirationLevel> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    Ok(AspirationLevel {
        y_on: history.min_value() - epsilon * params.sigma(),
        epsilon,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriterionKind {
    /// Standardized improvement `(y_on - m) / s`; monotone in the
    /// probability of falling below the aspiration level.
    PCriterion,
    /// `E max(y_on - xi(x), 0)`.
    ExpectedImprovement,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionValue {
    pub kind: CriterionKind,
    pub value: f64,
    /// Conditional standard deviation is (numerically) zero; the value is a
    /// limit, and such candidates never beat a non-degenerate one.
    pub degenerate: bool,
}

impl CriterionValue {
    /// Total preorder used by the argmax: non-degenerate beats degenerate,
    /// then larger values win.
    pub fn beats(&self, other: &CriterionValue) -> bool {
        match (self.degenerate, other.degenerate) {
            (false, true) => true,
            (true, false) => false,
            _ => self.value > other.value,
        }
    }
}

fn is_degenerate(sd: f64, prior_sd: f64) -> bool {
    sd <= DEGENERATE_REL_SD * prior_sd
}

/// P-criterion from already computed moments.
pub fn p_statistic(y_on: f64, mean: f64, sd: f64, prior_sd: f64) -> CriterionValue {
    if is_degenerate(sd, prior_sd) {
        let value = if mean > y_on {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        };
        return CriterionValue {
            kind: CriterionKind::PCriterion,
            value,
            degenerate: true,
        };
    }
    CriterionValue {
        kind: CriterionKind::PCriterion,
        value: (y_on - mean) / sd,
        degenerate: false,
    }
}

/// `s * (u Phi(u) + phi(u))` with `u = (y_on - m) / s`.
pub fn ei_closed_form(y_on: f64, mean: f64, sd: f64) -> f64 {
    let u = (y_on - mean) / sd;
    let v = sd * (u * normal_cdf(u) + normal_pdf(u));
    v.max(0.0)
}

/// Expected improvement from already computed moments.
pub fn ei_statistic(y_on: f64, mean: f64, sd: f64, prior_sd: f64) -> CriterionValue {
    if is_degenerate(sd, prior_sd) {
        return CriterionValue {
            kind: CriterionKind::ExpectedImprovement,
            value: (y_on - mean).max(0.0),
            degenerate: true,
        };
    }
    CriterionValue {
        kind: CriterionKind::ExpectedImprovement,
        value: ei_closed_form(y_on, mean, sd),
        degenerate: false,
    }
}

pub fn p_criterion(
    posterior: &SurrogatePosterior,
    aspiration: &AspirationLevel,
    x: &[f64],
) -> CriterionValue {
    let m = posterior.conditional_moments(x);
    p_statistic(
        aspiration.y_on,
        m.mean,
        m.std_dev(),
        posterior.parameters().sigma(),
    )
}

pub fn expected_improvement(
    posterior: &SurrogatePosterior,
    aspiration: &AspirationLevel,
    x: &[f64],
) -> CriterionValue {
    let m = posterior.conditional_moments(x);
    ei_statistic(
        aspiration.y_on,
        m.mean,
        m.std_dev(),
        posterior.parameters().sigma(),
    )
}

pub fn evaluate(
    kind: CriterionKind,
    posterior: &SurrogatePosterior,
    aspiration: &AspirationLevel,
    x: &[f64],
) -> CriterionValue {
    match kind {
        CriterionKind::PCriterion => p_criterion(posterior, aspiration, x),
        CriterionKind::ExpectedImprovement => expected_improvement(posterior, aspiration, x),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::{CorrelationKernel, Estimator, Region};
    use std::f64::consts::PI;

    fn history(xs: &[f64], ys: &[f64]) -> EvaluationHistory {
        EvaluationHistory::new(
            Region::interval(0.0, 1.0).unwrap(),
            xs.iter().map(|x| vec![*x]).collect(),
            ys.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn aspiration_hand_values() {
        let h = history(&[0.0, 1.0], &[0.0, 2.0]);
        let p = ModelParameters {
            mu: 1.0,
            sigma2: 2.0,
            estimator: Estimator::Sample,
        };
        let a = aspiration(&h, &p, 0.1).unwrap();
        assert!((a.y_on + 0.1 * 2f64.sqrt()).abs() < 1e-16);
        assert!((a.y_on + 0.141421).abs() < 1e-6);

        let h = history(&[0.0, 1.0], &[3.0, 3.0]);
        let p = ModelParameters {
            mu: 3.0,
            sigma2: 0.0,
            estimator: Estimator::Sample,
        };
        assert_eq!(aspiration(&h, &p, 0.1).unwrap().y_on, 3.0);
        assert!(aspiration(&h, &p, 0.0).is_err());
    }

    #[test]
    fn ei_limits() {
        assert!((ei_closed_form(1.0, 1.0, 2.0) - 2.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
        let v = ei_statistic(1.0, 0.25, 0.0, 1.0);
        assert!(v.degenerate);
        assert_eq!(v.value, 0.75);
        assert_eq!(ei_statistic(1.0, 2.0, 0.0, 1.0).value, 0.0);
    }

    #[test]
    fn p_centered_is_zero() {
        let v = p_statistic(0.5, 0.5, 0.3, 1.0);
        assert_eq!(v.value, 0.0);
        assert!(!v.degenerate);
    }

    #[test]
    fn history_points_are_degenerate() {
        let h = history(&[0.0, 0.3, 1.0], &[1.0, -1.0, 0.5]);
        let post =
            SurrogatePosterior::build(&h, &CorrelationKernel::default(), Estimator::Mle).unwrap();
        let asp = aspiration(&h, post.parameters(), 0.1).unwrap();
        for x in [0.0, 0.3, 1.0] {
            let v = p_criterion(&post, &asp, &[x]);
            assert!(v.degenerate);
            assert_eq!(v.value, f64::NEG_INFINITY);
            let off = p_criterion(&post, &asp, &[0.65]);
            assert!(off.beats(&v));
        }
    }

    #[test]
    fn ranking_prefers_non_degenerate() {
        let d = CriterionValue {
            kind: CriterionKind::PCriterion,
            value: f64::INFINITY,
            degenerate: true,
        };
        let n = CriterionValue {
            kind: CriterionKind::PCriterion,
            value: -50.0,
            degenerate: false,
        };
        assert!(n.beats(&d));
        assert!(!d.beats(&n));
        assert!(!n.beats(&n));
    }
}
