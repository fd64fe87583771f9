//! The optimization loop driven by extended-numeral objective values.
//!
//! The objective is evaluated conventionally and then mapped to
//! `z = a * f(x) + b` with `a`, `b` extended numerals. Everything that
//! depends on the values (the mean estimate, residuals, the aspiration
//! level, the conditional mean and the criterion numerator) is computed in
//! extended arithmetic. Everything that depends only on the points (the
//! correlation matrix, its factor and the kriging weights) is finite and
//! shared with the conventional path.
//!
//! The standard deviation is carried as `a * sigma`, never as the square
//! root of an extended numeral, which is why `a` must be a positive single
//! term. The criterion `(z_on - m(x)) / s(x)` then has to collapse to a
//! purely finite numeral; each step records how close that collapse was.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::acquisition::{self, CriterionKind, CriterionValue, DEGENERATE_REL_SD};
use crate::error::{Error, Result};
use crate::gp::{Estimator, EvaluationHistory, Region, SurrogatePosterior};
use crate::normal::{normal_cdf, normal_pdf};
use crate::numeral::ExtendedNumeral;
use crate::optimizer::{self, CandidateGrid, OptimizationTrace, OptimizerConfig, Proposal};

/// Largest tolerated non-finite residue in a collapsed criterion, relative
/// to the size of the data at that grade.
pub const COLLAPSE_TOL: f64 = 1e-9;

/// Per-step evidence that the extended computation matched the finite one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseCertificate {
    pub iter: usize,
    pub grid_index: usize,
    /// Largest relative residue left outside grade 0 by any candidate.
    pub max_residue: f64,
    /// Largest `|extended - conventional| / max(1, |conventional|)` over
    /// non-degenerate candidates.
    pub max_deviation: f64,
    /// Relative mismatch between the extended variance estimate and
    /// `a^2 * sigma2`.
    pub variance_mismatch: f64,
    pub mu: ExtendedNumeral,
    pub sigma: ExtendedNumeral,
    pub z_on: ExtendedNumeral,
    pub fallback: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledTrace {
    pub a: ExtendedNumeral,
    pub b: ExtendedNumeral,
    /// Rows carry the finite objective values and finite-unit estimates.
    pub trace: OptimizationTrace,
    /// `a * f(x) + b` for every row of `trace`.
    pub scaled_values: Vec<ExtendedNumeral>,
    pub certificates: Vec<CollapseCertificate>,
}

struct ExtendedScore {
    value: CriterionValue,
    /// Extended criterion used for ranking non-degenerate candidates.
    extended: Option<ExtendedNumeral>,
}

fn beats(a: &ExtendedScore, b: &ExtendedScore) -> bool {
    match (&a.extended, &b.extended) {
        (Some(x), Some(y)) => x.compare(y) == Ordering::Greater,
        _ => a.value.beats(&b.value),
    }
}

/// Relative size of the largest term of `num` outside `keep`, measured
/// against the data magnitude at the same grade.
fn residue(num: &ExtendedNumeral, keep: i32, data: &[ExtendedNumeral]) -> f64 {
    num.terms()
        .filter(|(g, _)| *g != keep)
        .map(|(g, c)| {
            let scale = data
                .iter()
                .map(|z| z.coefficient(g).abs())
                .fold(0.0, f64::max);
            if scale > 0.0 {
                c.abs() / scale
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}

struct Step {
    proposal: Proposal,
    certificate: CollapseCertificate,
}

fn scaled_step(
    config: &OptimizerConfig,
    grid: &CandidateGrid,
    history: &EvaluationHistory,
    z: &[ExtendedNumeral],
    a_coef: f64,
    a_grade: i32,
    iter: usize,
) -> Result<Step> {
    let posterior = SurrogatePosterior::build(history, &config.kernel, config.estimator)?;
    let params = *posterior.parameters();
    let conv_asp = acquisition::aspiration(history, &params, config.epsilon)?;
    let n = z.len();

    // mu~ = sum w_i z_i
    let mu = posterior
        .mean_weights()
        .iter()
        .zip(z)
        .fold(ExtendedNumeral::zero(), |acc, (w, zi)| acc + zi.scale(*w));
    let resid: Vec<ExtendedNumeral> = z.iter().map(|zi| zi - &mu).collect();

    // sigma~ = a * sigma, checked against the extended variance estimate.
    let sigma_bar = params.sigma();
    let sigma = ExtendedNumeral::monomial(a_coef * sigma_bar, a_grade);
    let var_ext = match config.estimator {
        Estimator::Sample => resid
            .iter()
            .fold(ExtendedNumeral::zero(), |acc, r| acc + r * r)
            .scale(1.0 / (n - 1) as f64),
        Estimator::Mle => {
            let mut grades: Vec<i32> = resid
                .iter()
                .flat_map(|r| r.terms().map(|(g, _)| g))
                .collect();
            grades.sort_unstable();
            grades.dedup();
            // S^{-1} r~, one grade at a time.
            let mut solved = vec![ExtendedNumeral::zero(); n];
            for g in grades {
                let col: Vec<f64> = resid.iter().map(|r| r.coefficient(g)).collect();
                for (s, v) in solved.iter_mut().zip(posterior.solve(&col)) {
                    *s = &*s + &ExtendedNumeral::monomial(v, g);
                }
            }
            resid
                .iter()
                .zip(&solved)
                .fold(ExtendedNumeral::zero(), |acc, (r, s)| acc + r * s)
                .scale(1.0 / n as f64)
        }
    };
    let var_expected = &sigma * &sigma;
    let variance_mismatch = if params.sigma2 == 0.0 {
        if var_ext.is_zero() {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        let scale = var_expected.coefficient(2 * a_grade).abs();
        (&var_ext - &var_expected)
            .terms()
            .map(|(_, c)| c.abs() / scale)
            .fold(0.0, f64::max)
    };

    let z_min = z.iter().min().expect("history is non-empty").clone();
    let z_on = &z_min - &sigma.scale(config.epsilon);

    let mut certificate = CollapseCertificate {
        iter,
        grid_index: 0,
        max_residue: 0.0,
        max_deviation: 0.0,
        variance_mismatch,
        mu: mu.clone(),
        sigma: sigma.clone(),
        z_on: z_on.clone(),
        fallback: false,
    };

    if params.sigma2 == 0.0 {
        let index = grid
            .points()
            .iter()
            .position(|x| history.find(x).is_none())
            .ok_or(Error::AllCandidatesDegenerate)?;
        certificate.grid_index = index;
        certificate.fallback = true;
        return Ok(Step {
            proposal: Proposal {
                point: grid.point(index).to_vec(),
                grid_index: index,
                criterion: None,
                params,
                aspiration: conv_asp,
                fallback: true,
                scores: Vec::new(),
            },
            certificate,
        });
    }

    let kind = config.algorithm.criterion();
    let mut best: Option<(usize, ExtendedScore)> = None;
    for (index, x) in grid.points().iter().enumerate() {
        if history.find(x).is_some() {
            continue;
        }
        let (beta, q) = posterior.kriging_weights(x);
        let frac = (1.0 - q).max(0.0).sqrt();
        let m = beta
            .iter()
            .zip(&resid)
            .fold(mu.clone(), |acc, (b, r)| acc + r.scale(*b));
        let numerator = &z_on - &m;
        let score = if frac <= DEGENERATE_REL_SD {
            let value = match kind {
                CriterionKind::PCriterion => {
                    if numerator.signum() < 0 {
                        f64::NEG_INFINITY
                    } else {
                        f64::INFINITY
                    }
                }
                CriterionKind::ExpectedImprovement => {
                    let gain = if numerator.signum() > 0 {
                        numerator.div_monomial(&ExtendedNumeral::monomial(a_coef, a_grade))?
                    } else {
                        ExtendedNumeral::zero()
                    };
                    gain.coefficient(0)
                }
            };
            ExtendedScore {
                value: CriterionValue {
                    kind,
                    value,
                    degenerate: true,
                },
                extended: None,
            }
        } else {
            let sd = ExtendedNumeral::monomial(a_coef * sigma_bar * frac, a_grade);
            let ratio = numerator.div_monomial(&sd)?;
            let res = residue(&numerator, a_grade, z);
            certificate.max_residue = certificate.max_residue.max(res);
            if res > COLLAPSE_TOL {
                return Err(Error::CollapseFailure {
                    step: iter,
                    residual: res,
                });
            }
            let u = ratio.coefficient(0);
            let (extended, value) = match kind {
                CriterionKind::PCriterion => (ExtendedNumeral::finite(u), u),
                CriterionKind::ExpectedImprovement => {
                    let g = (u * normal_cdf(u) + normal_pdf(u)).max(0.0);
                    let ei = sd.scale(g);
                    let finite = sigma_bar * frac * g;
                    (ei, finite)
                }
            };
            let conventional = acquisition::evaluate(kind, &posterior, &conv_asp, x);
            if !conventional.degenerate {
                let dev = (value - conventional.value).abs() / conventional.value.abs().max(1.0);
                certificate.max_deviation = certificate.max_deviation.max(dev);
            }
            ExtendedScore {
                value: CriterionValue {
                    kind,
                    value,
                    degenerate: false,
                },
                extended: Some(extended),
            }
        };
        match &best {
            Some((_, b)) if !beats(&score, b) => {}
            _ => best = Some((index, score)),
        }
    }
    let (index, score) = best
        .filter(|(_, s)| !s.value.degenerate)
        .ok_or(Error::AllCandidatesDegenerate)?;
    certificate.grid_index = index;
    Ok(Step {
        proposal: Proposal {
            point: grid.point(index).to_vec(),
            grid_index: index,
            criterion: Some(score.value.value),
            params,
            aspiration: conv_asp,
            fallback: false,
            scores: Vec::new(),
        },
        certificate,
    })
}

/// Runs the P-algorithm (or one-step Bayesian algorithm) on
/// `a * f(x) + b` with extended-numeral `a` and `b`.
///
/// `a` must be a single positive term `c * G^p`. Local refinement is not
/// applied on this path.
pub fn scaled_criterion_run<F: FnMut(&[f64]) -> f64>(
    config: &OptimizerConfig,
    region: &Region,
    mut objective: F,
    a: &ExtendedNumeral,
    b: &ExtendedNumeral,
    initial_design: &[Vec<f64>],
    budget: usize,
) -> Result<ScaledTrace> {
    let (a_coef, a_grade) = match a.as_monomial() {
        Some((c, g)) if c > 0.0 => (c, g),
        _ => {
            return Err(Error::UnsupportedScale(format!(
                "scale factor must be a single positive term c*G^p, got {a}"
            )))
        }
    };
    let grid = config.grid(region)?;
    let (mut history, mut trace) =
        optimizer::start(config, region, &grid, &mut objective, initial_design)?;
    let lift = |y: f64| &a.scale(y) + b;
    let mut z: Vec<ExtendedNumeral> = history.values().iter().map(|y| lift(*y)).collect();
    let mut certificates = Vec::with_capacity(budget);
    for iter in 1..=budget {
        let step = scaled_step(config, &grid, &history, &z, a_coef, a_grade, iter)?;
        let y = optimizer::evaluate_objective(&mut objective, &step.proposal.point)?;
        history.push(step.proposal.point.clone(), y)?;
        z.push(lift(y));
        optimizer::record(&mut trace, iter, &step.proposal, y);
        certificates.push(step.certificate);
    }
    Ok(ScaledTrace {
        a: a.clone(),
        b: b.clone(),
        trace,
        scaled_values: z,
        certificates,
    })
}
