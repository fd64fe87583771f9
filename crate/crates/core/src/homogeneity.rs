//! Side-by-side runs on `f` and on `a * f + b`.
//!
//! The Gaussian-model algorithms are compared in lockstep: both runs plan
//! from their own data, and after each step both histories receive the
//! point chosen on `f`. As long as every step matches this is exactly two
//! independent runs; after a mismatch it keeps the later steps comparable.

use serde::{Deserialize, Serialize};

use crate::acquisition::{CriterionKind, CriterionValue};
use crate::direct::DirectState;
use crate::error::Result;
use crate::gp::Region;
use crate::numeral::ExtendedNumeral;
use crate::optimizer::{self, propose, Algorithm, OptimizerConfig, Proposal};
use crate::scaled::scaled_criterion_run;

/// Two criterion values closer than this (relative) form a near-tie.
pub const NEAR_TIE_REL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepComparison {
    pub iter: usize,
    pub index_f: usize,
    pub index_h: usize,
    pub matched: bool,
    /// The disputed candidates score within [`NEAR_TIE_REL`] of each other
    /// in at least one of the runs.
    pub near_tie: bool,
    /// Largest pointwise criterion discrepancy after undoing the scaling
    /// (`None` when either side used the zero-variance fallback).
    pub score_deviation: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityReport {
    pub algorithm: String,
    pub a: String,
    pub b: String,
    pub steps: Vec<StepComparison>,
}

impl HomogeneityReport {
    /// Every step matched or was a near-tie.
    pub fn passed(&self) -> bool {
        self.steps.iter().all(|s| s.matched || s.near_tie)
    }

    pub fn first_mismatch(&self) -> Option<&StepComparison> {
        self.steps.iter().find(|s| !s.matched && !s.near_tie)
    }

    pub fn near_ties(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| !s.matched && s.near_tie)
            .count()
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(["iter", "index_f", "index_h", "match", "near_tie"])?;
        for s in &self.steps {
            w.write_record([
                s.iter.to_string(),
                s.index_f.to_string(),
                s.index_h.to_string(),
                s.matched.to_string(),
                s.near_tie.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn near_tie(x: f64, y: f64) -> bool {
    if x == y {
        return true;
    }
    let scale = x.abs().max(y.abs());
    scale.is_finite() && (x - y).abs() <= NEAR_TIE_REL * scale
}

fn disputed_tie(scores: &[Option<CriterionValue>], i: usize, j: usize) -> bool {
    match (
        scores.get(i).copied().flatten(),
        scores.get(j).copied().flatten(),
    ) {
        (Some(u), Some(v)) => u.degenerate == v.degenerate && near_tie(u.value, v.value),
        _ => false,
    }
}

fn score_deviation(kind: CriterionKind, base: &Proposal, scaled: &Proposal, a: f64) -> Option<f64> {
    if base.fallback || scaled.fallback {
        return None;
    }
    let unscale = match kind {
        CriterionKind::PCriterion => 1.0,
        CriterionKind::ExpectedImprovement => 1.0 / a,
    };
    Some(
        base.scores
            .iter()
            .zip(&scaled.scores)
            .filter_map(|(u, v)| match (u, v) {
                (Some(u), Some(v)) if !u.degenerate && !v.degenerate => {
                    Some((u.value - v.value * unscale).abs() / u.value.abs().max(1.0))
                }
                _ => None,
            })
            .fold(0.0, f64::max),
    )
}

/// Compares the grid-index sequences on `f` and `a * f + b` for finite
/// `a > 0` and `b`.
pub fn compare_finite<F: Fn(&[f64]) -> f64>(
    config: &OptimizerConfig,
    region: &Region,
    objective: F,
    a: f64,
    b: f64,
    initial_design: &[Vec<f64>],
    budget: usize,
) -> Result<HomogeneityReport> {
    let grid = config.grid(region)?;
    let mut f = |x: &[f64]| objective(x);
    let (mut hist_f, _) = optimizer::start(config, region, &grid, &mut f, initial_design)?;
    let scaled_values: Vec<f64> = hist_f.values().iter().map(|y| a * y + b).collect();
    let mut hist_h = hist_f.with_values(scaled_values)?;
    let kind = config.algorithm.criterion();
    let mut steps = Vec::with_capacity(budget);
    for iter in 1..=budget {
        let pf = propose(config, &grid, &hist_f)?;
        let ph = propose(config, &grid, &hist_h)?;
        let matched = pf.grid_index == ph.grid_index;
        let tie = !matched
            && !pf.fallback
            && !ph.fallback
            && (disputed_tie(&pf.scores, pf.grid_index, ph.grid_index)
                || disputed_tie(&ph.scores, pf.grid_index, ph.grid_index));
        steps.push(StepComparison {
            iter,
            index_f: pf.grid_index,
            index_h: ph.grid_index,
            matched,
            near_tie: tie,
            score_deviation: score_deviation(kind, &pf, &ph, a),
        });
        let y = optimizer::evaluate_objective(&mut f, &pf.point)?;
        hist_f.push(pf.point.clone(), y)?;
        hist_h.push(pf.point, a * y + b)?;
    }
    Ok(HomogeneityReport {
        algorithm: algorithm_name(config.algorithm).into(),
        a: a.to_string(),
        b: b.to_string(),
        steps,
    })
}

/// Compares a conventional run on `f` with the extended-arithmetic run on
/// `a * f + b`.
pub fn compare_extended<F: Fn(&[f64]) -> f64>(
    config: &OptimizerConfig,
    region: &Region,
    objective: F,
    a: &ExtendedNumeral,
    b: &ExtendedNumeral,
    initial_design: &[Vec<f64>],
    budget: usize,
) -> Result<HomogeneityReport> {
    let config = OptimizerConfig {
        refine: false,
        ..config.clone()
    };
    let grid = config.grid(region)?;
    let scaled = scaled_criterion_run(&config, region, &objective, a, b, initial_design, budget)?;
    let mut f = |x: &[f64]| objective(x);
    let (mut hist, _) = optimizer::start(&config, region, &grid, &mut f, initial_design)?;
    let mut steps = Vec::with_capacity(budget);
    for (iter, row) in (1..=budget).zip(scaled.trace.iterations()) {
        let p = propose(&config, &grid, &hist)?;
        let index_h = row.grid_index.expect("loop rows carry a grid index");
        let matched = p.grid_index == index_h;
        let tie = !matched && !p.fallback && disputed_tie(&p.scores, p.grid_index, index_h);
        steps.push(StepComparison {
            iter,
            index_f: p.grid_index,
            index_h,
            matched,
            near_tie: tie,
            score_deviation: scaled
                .certificates
                .get(iter - 1)
                .filter(|c| !c.fallback)
                .map(|c| c.max_deviation),
        });
        let y = optimizer::evaluate_objective(&mut f, &p.point)?;
        hist.push(p.point, y)?;
        if !matched {
            // The extended run went its own way; later steps are not comparable.
            break;
        }
    }
    Ok(HomogeneityReport {
        algorithm: algorithm_name(config.algorithm).into(),
        a: a.to_string(),
        b: b.to_string(),
        steps,
    })
}

pub fn algorithm_name(algorithm: Algorithm) -> &'static str {
    match algorithm {
        Algorithm::PAlgorithm => "p",
        Algorithm::OneStepBayes => "ei",
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectStepComparison {
    pub iter: usize,
    pub subdivided_f: Vec<usize>,
    pub subdivided_h: Vec<usize>,
    pub matched: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectHomogeneityReport {
    pub a: f64,
    pub b: f64,
    pub epsilon: f64,
    pub steps: Vec<DirectStepComparison>,
}

impl DirectHomogeneityReport {
    pub fn passed(&self) -> bool {
        self.steps.iter().all(|s| s.matched)
    }

    pub fn first_mismatch(&self) -> Option<&DirectStepComparison> {
        self.steps.iter().find(|s| !s.matched)
    }
}

/// Runs DIRECT on `f` and `a * f + b` and compares the subdivided sets
/// iteration by iteration, stopping at the first difference.
pub fn compare_direct<F: Fn(f64) -> f64>(
    objective: F,
    lower: f64,
    upper: f64,
    epsilon: f64,
    a: f64,
    b: f64,
    budget: usize,
) -> Result<DirectHomogeneityReport> {
    let mut f = |x: f64| objective(x);
    let mut h = |x: f64| a * objective(x) + b;
    let mut sf = DirectState::start(&mut f, lower, upper, epsilon)?;
    let mut sh = DirectState::start(&mut h, lower, upper, epsilon)?;
    let mut steps = Vec::with_capacity(budget);
    for iter in 1..=budget {
        let df = sf.step(&mut f)?.subdivided.clone();
        let dh = sh.step(&mut h)?.subdivided.clone();
        let matched = df == dh;
        steps.push(DirectStepComparison {
            iter,
            subdivided_f: df,
            subdivided_h: dh,
            matched,
        });
        if !matched {
            break;
        }
    }
    Ok(DirectHomogeneityReport {
        a,
        b,
        epsilon,
        steps,
    })
}
