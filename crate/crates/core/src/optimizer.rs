//! The sequential optimization loop.
//!
//! Every iteration re-estimates the model parameters, rebuilds the
//! posterior, computes the aspiration level and picks the maximizer of the
//! acquisition criterion over a fixed candidate lattice. Sharing one lattice
//! between runs makes "the same point was chosen" an exact, index-level
//! statement.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::acquisition::{self, AspirationLevel, CriterionKind, CriterionValue};
use crate::error::{Error, Result};
use crate::gp::{
    max_norm_distance, CorrelationKernel, Estimator, EvaluationHistory, ModelParameters, Region,
    SurrogatePosterior, DUPLICATE_THRESHOLD,
};

/// Golden-section iterations used by the optional local refinement.
pub const REFINE_ITERATIONS: usize = 40;

pub fn default_resolution(dim: usize) -> usize {
    match dim {
        1 => 1001,
        2 => 101,
        _ => 21,
    }
}

/// Regular lattice over a region, ordered lexicographically with the first
/// axis varying slowest. Includes every corner of the region.
#[derive(Clone, Debug)]
pub struct CandidateGrid {
    region: Region,
    resolution: usize,
    points: Vec<Vec<f64>>,
}

impl CandidateGrid {
    pub fn new(region: &Region, resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::InvalidConfig(format!(
                "grid resolution must be at least 2, got {resolution}"
            )));
        }
        let dim = region.dim();
        let total = resolution
            .checked_pow(dim as u32)
            .filter(|t| *t <= 50_000_000)
            .ok_or_else(|| Error::InvalidConfig("candidate grid too large".into()))?;
        let axes: Vec<Vec<f64>> = (0..dim)
            .map(|k| {
                (0..resolution)
                    .map(|i| axis_value(region.lower()[k], region.upper()[k], i, resolution))
                    .collect()
            })
            .collect();
        let mut points = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rem = flat;
            let mut p = vec![0.0; dim];
            for k in (0..dim).rev() {
                p[k] = axes[k][rem % resolution];
                rem /= resolution;
            }
            points.push(p);
        }
        Ok(CandidateGrid {
            region: region.clone(),
            resolution,
            points,
        })
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, index: usize) -> &[f64] {
        &self.points[index]
    }

    /// Spacing between neighbouring candidates along each axis.
    pub fn cell(&self) -> Vec<f64> {
        self.region
            .lower()
            .iter()
            .zip(self.region.upper())
            .map(|(lo, hi)| (hi - lo) / (self.resolution - 1) as f64)
            .collect()
    }

    /// Index of the lattice point within the duplicate threshold of `x`.
    pub fn index_of(&self, x: &[f64]) -> Option<usize> {
        if x.len() != self.region.dim() {
            return None;
        }
        let mut flat = 0usize;
        for (k, v) in x.iter().enumerate() {
            let lo = self.region.lower()[k];
            let hi = self.region.upper()[k];
            let t = (v - lo) / (hi - lo) * (self.resolution - 1) as f64;
            let i = t.round();
            if i < 0.0 || i > (self.resolution - 1) as f64 {
                return None;
            }
            flat = flat * self.resolution + i as usize;
        }
        (max_norm_distance(&self.points[flat], x) < DUPLICATE_THRESHOLD).then_some(flat)
    }
}

fn axis_value(lo: f64, hi: f64, i: usize, resolution: usize) -> f64 {
    if i + 1 == resolution {
        hi
    } else {
        lo + (hi - lo) * i as f64 / (resolution - 1) as f64
    }
}

/// Five equispaced points in 1-D; corners plus center otherwise.
pub fn default_initial_design(region: &Region) -> Vec<Vec<f64>> {
    let dim = region.dim();
    if dim == 1 {
        let (lo, hi) = (region.lower()[0], region.upper()[0]);
        return (0..5).map(|i| vec![axis_value(lo, hi, i, 5)]).collect();
    }
    let mut design = Vec::with_capacity((1 << dim) + 1);
    for mask in 0..(1usize << dim) {
        design.push(
            (0..dim)
                .map(|k| {
                    if mask >> (dim - 1 - k) & 1 == 1 {
                        region.upper()[k]
                    } else {
                        region.lower()[k]
                    }
                })
                .collect(),
        );
    }
    design.push(
        region
            .lower()
            .iter()
            .zip(region.upper())
            .map(|(lo, hi)| 0.5 * (lo + hi))
            .collect(),
    );
    design
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    PAlgorithm,
    OneStepBayes,
}

impl Algorithm {
    pub fn criterion(self) -> CriterionKind {
        match self {
            Algorithm::PAlgorithm => CriterionKind::PCriterion,
            Algorithm::OneStepBayes => CriterionKind::ExpectedImprovement,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub algorithm: Algorithm,
    pub kernel: CorrelationKernel,
    pub estimator: Estimator,
    pub epsilon: f64,
    /// Points per axis; `None` picks [`default_resolution`].
    pub resolution: Option<usize>,
    pub refine: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            algorithm: Algorithm::PAlgorithm,
            kernel: CorrelationKernel::default(),
            estimator: Estimator::Mle,
            epsilon: acquisition::DEFAULT_EPSILON,
            resolution: None,
            refine: false,
        }
    }
}

impl OptimizerConfig {
    pub fn grid(&self, region: &Region) -> Result<CandidateGrid> {
        CandidateGrid::new(
            region,
            self.resolution
                .unwrap_or_else(|| default_resolution(region.dim())),
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    pub point: Vec<f64>,
    pub grid_index: usize,
    pub value: CriterionValue,
}

/// Criterion at every candidate; `None` marks candidates that coincide with
/// a history point.
pub fn score_grid(
    kind: CriterionKind,
    posterior: &SurrogatePosterior,
    aspiration: &AspirationLevel,
    grid: &CandidateGrid,
) -> Vec<Option<CriterionValue>> {
    let history = posterior.history();
    grid.points()
        .iter()
        .map(|x| {
            if history.find(x).is_some() {
                None
            } else {
                Some(acquisition::evaluate(kind, posterior, aspiration, x))
            }
        })
        .collect()
}

/// Winner among scored candidates. Exact ties go to the lowest index.
pub fn select_best(scores: &[Option<CriterionValue>]) -> Option<usize> {
    let mut best: Option<(usize, &CriterionValue)> = None;
    for (i, s) in scores.iter().enumerate() {
        let Some(s) = s else { continue };
        match best {
            Some((_, b)) if !s.beats(b) => {}
            _ => best = Some((i, s)),
        }
    }
    best.filter(|(_, v)| !v.degenerate).map(|(i, _)| i)
}

pub fn argmax_criterion(
    kind: CriterionKind,
    posterior: &SurrogatePosterior,
    aspiration: &AspirationLevel,
    grid: &CandidateGrid,
    refine: bool,
) -> Result<Selection> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("empty candidate grid".into()));
    }
    let scores = score_grid(kind, posterior, aspiration, grid);
    let index = select_best(&scores).ok_or(Error::AllCandidatesDegenerate)?;
    let value = scores[index].expect("selected candidate was scored");
    let mut selection = Selection {
        point: grid.point(index).to_vec(),
        grid_index: index,
        value,
    };
    if refine {
        refine_selection(kind, posterior, aspiration, grid, &mut selection);
    }
    Ok(selection)
}

fn refine_score(
    kind: CriterionKind,
    posterior: &SurrogatePosterior,
    aspiration: &AspirationLevel,
    x: &[f64],
) -> Option<CriterionValue> {
    if posterior.history().find(x).is_some() {
        return None;
    }
    let v = acquisition::evaluate(kind, posterior, aspiration, x);
    (!v.degenerate).then_some(v)
}

/// Cyclic coordinate golden-section search in a one-cell box around the
/// grid winner. Keeps the grid point unless strictly improved.
fn refine_selection(
    kind: CriterionKind,
    posterior: &SurrogatePosterior,
    aspiration: &AspirationLevel,
    grid: &CandidateGrid,
    selection: &mut Selection,
) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let cell = grid.cell();
    let region = grid.region();
    let mut current = selection.point.clone();
    let mut current_val = selection.value;
    for axis in 0..region.dim() {
        let mut a = (current[axis] - cell[axis]).max(region.lower()[axis]);
        let mut b = (current[axis] + cell[axis]).min(region.upper()[axis]);
        let eval = |t: f64| {
            let mut x = current.clone();
            x[axis] = t;
            let v = refine_score(kind, posterior, aspiration, &x);
            (x, v)
        };
        let key = |v: &Option<CriterionValue>| v.map_or(f64::NEG_INFINITY, |c| c.value);
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let mut fc = eval(c);
        let mut fd = eval(d);
        for _ in 0..REFINE_ITERATIONS {
            if key(&fc.1) >= key(&fd.1) {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = eval(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = eval(d);
            }
        }
        for (x, v) in [fc, fd] {
            if let Some(v) = v {
                if v.beats(&current_val) {
                    current = x;
                    current_val = v;
                }
            }
        }
    }
    selection.point = current;
    selection.value = current_val;
}

/// One planning step.
#[derive(Clone, Debug)]
pub struct Proposal {
    pub point: Vec<f64>,
    pub grid_index: usize,
    /// Criterion at the selected point; `None` for the zero-variance fallback.
    pub criterion: Option<f64>,
    pub params: ModelParameters,
    pub aspiration: AspirationLevel,
    pub fallback: bool,
    pub scores: Vec<Option<CriterionValue>>,
}

/// Plans the next evaluation for `history`.
///
/// With zero estimated variance the criteria are undefined everywhere; the
/// first unvisited lattice point is chosen instead.
pub fn propose(
    config: &OptimizerConfig,
    grid: &CandidateGrid,
    history: &EvaluationHistory,
) -> Result<Proposal> {
    let posterior = SurrogatePosterior::build(history, &config.kernel, config.estimator)?;
    let params = *posterior.parameters();
    let asp = acquisition::aspiration(history, &params, config.epsilon)?;
    if params.sigma2 == 0.0 {
        let index = grid
            .points()
            .iter()
            .position(|x| history.find(x).is_none())
            .ok_or(Error::AllCandidatesDegenerate)?;
        return Ok(Proposal {
            point: grid.point(index).to_vec(),
            grid_index: index,
            criterion: None,
            params,
            aspiration: asp,
            fallback: true,
            scores: Vec::new(),
        });
    }
    let kind = config.algorithm.criterion();
    let scores = score_grid(kind, &posterior, &asp, grid);
    let index = select_best(&scores).ok_or(Error::AllCandidatesDegenerate)?;
    let mut selection = Selection {
        point: grid.point(index).to_vec(),
        grid_index: index,
        value: scores[index].expect("selected candidate was scored"),
    };
    if config.refine {
        refine_selection(kind, &posterior, &asp, grid, &mut selection);
    }
    Ok(Proposal {
        point: selection.point,
        grid_index: index,
        criterion: Some(selection.value.value),
        params,
        aspiration: asp,
        fallback: false,
        scores,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    /// 0 for initial-design rows, then 1, 2, ...
    pub iter: usize,
    pub grid_index: Option<usize>,
    pub x: Vec<f64>,
    pub y: f64,
    pub criterion: Option<f64>,
    pub mu: Option<f64>,
    pub sigma2: Option<f64>,
    pub y_on: Option<f64>,
    /// Running minimum of `y`.
    pub best: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub algorithm: Algorithm,
    pub rows: Vec<TraceRow>,
}

impl OptimizationTrace {
    pub fn new(algorithm: Algorithm) -> Self {
        OptimizationTrace {
            algorithm,
            rows: Vec::new(),
        }
    }

    /// Rows produced by the loop, excluding the initial design.
    pub fn iterations(&self) -> impl Iterator<Item = &TraceRow> {
        self.rows.iter().filter(|r| r.iter > 0)
    }

    pub fn grid_indices(&self) -> Vec<usize> {
        self.iterations().filter_map(|r| r.grid_index).collect()
    }

    pub fn best(&self) -> Option<&TraceRow> {
        self.rows
            .iter()
            .fold(None, |acc: Option<&TraceRow>, r| match acc {
                Some(b) if b.y <= r.y => Some(b),
                _ => Some(r),
            })
    }

    pub fn dim(&self) -> usize {
        self.rows.first().map_or(1, |r| r.x.len())
    }

    fn push(&mut self, mut row: TraceRow) {
        let prev = self.rows.last().map_or(f64::INFINITY, |r| r.best);
        row.best = prev.min(row.y);
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let dim = self.dim();
        let mut header = vec!["iter".to_string(), "grid_index".to_string()];
        header.extend(x_columns(dim));
        header.extend(
            ["y", "criterion", "mu", "sigma2", "y_on", "best"]
                .iter()
                .map(|s| s.to_string()),
        );
        w.write_record(&header)?;
        let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
        for r in &self.rows {
            let mut rec = vec![
                r.iter.to_string(),
                r.grid_index.map_or(String::new(), |i| i.to_string()),
            ];
            rec.extend(r.x.iter().map(|v| v.to_string()));
            rec.push(r.y.to_string());
            rec.push(opt(r.criterion));
            rec.push(opt(r.mu));
            rec.push(opt(r.sigma2));
            rec.push(opt(r.y_on));
            rec.push(r.best.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(algorithm: Algorithm, input: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(input);
        let header = rd.headers()?.clone();
        if header.len() < 9 {
            return Err(Error::InvalidConfig(format!(
                "trace CSV has {} columns, expected at least 9",
                header.len()
            )));
        }
        let dim = header.len() - 8;
        let bad = |what: &str, s: &str| Error::InvalidConfig(format!("bad {what} field '{s}'"));
        let float = |s: &str| s.parse::<f64>().map_err(|_| bad("numeric", s));
        let opt = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                float(s).map(Some)
            }
        };
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let f = |i: usize| rec.get(i).unwrap_or("");
            rows.push(TraceRow {
                iter: f(0).parse().map_err(|_| bad("iter", f(0)))?,
                grid_index: if f(1).is_empty() {
                    None
                } else {
                    Some(f(1).parse().map_err(|_| bad("grid_index", f(1)))?)
                },
                x: (0..dim).map(|k| float(f(2 + k))).collect::<Result<_>>()?,
                y: float(f(2 + dim))?,
                criterion: opt(f(3 + dim))?,
                mu: opt(f(4 + dim))?,
                sigma2: opt(f(5 + dim))?,
                y_on: opt(f(6 + dim))?,
                best: float(f(7 + dim))?,
            });
        }
        Ok(OptimizationTrace { algorithm, rows })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn x_columns(dim: usize) -> Vec<String> {
    if dim == 1 {
        vec!["x".into()]
    } else {
        (1..=dim).map(|k| format!("x{k}")).collect()
    }
}

pub(crate) fn evaluate_objective<F: FnMut(&[f64]) -> f64>(f: &mut F, x: &[f64]) -> Result<f64> {
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::ObjectiveNonFinite {
            point: x.to_vec(),
            value: y,
        })
    }
}

/// Evaluates the initial design and returns the history plus its trace rows.
pub(crate) fn start<F: FnMut(&[f64]) -> f64>(
    config: &OptimizerConfig,
    region: &Region,
    grid: &CandidateGrid,
    objective: &mut F,
    initial_design: &[Vec<f64>],
) -> Result<(EvaluationHistory, OptimizationTrace)> {
    let needed = match config.estimator {
        Estimator::Sample => 2,
        Estimator::Mle => 1,
    };
    if initial_design.len() < needed {
        return Err(Error::InsufficientData {
            needed,
            got: initial_design.len(),
        });
    }
    let mut values = Vec::with_capacity(initial_design.len());
    for x in initial_design {
        if !region.contains(x) {
            return Err(Error::InvalidConfig(format!(
                "initial design point {x:?} lies outside the region"
            )));
        }
        values.push(evaluate_objective(objective, x)?);
    }
    let history = EvaluationHistory::new(region.clone(), initial_design.to_vec(), values)?;
    let mut trace = OptimizationTrace::new(config.algorithm);
    for (x, y) in history.points().iter().zip(history.values()) {
        trace.push(TraceRow {
            iter: 0,
            grid_index: grid.index_of(x),
            x: x.clone(),
            y: *y,
            criterion: None,
            mu: None,
            sigma2: None,
            y_on: None,
            best: f64::INFINITY,
        });
    }
    Ok((history, trace))
}

pub(crate) fn record(trace: &mut OptimizationTrace, iter: usize, proposal: &Proposal, y: f64) {
    trace.push(TraceRow {
        iter,
        grid_index: Some(proposal.grid_index),
        x: proposal.point.clone(),
        y,
        criterion: proposal.criterion,
        mu: Some(proposal.params.mu),
        sigma2: Some(proposal.params.sigma2),
        y_on: Some(proposal.aspiration.y_on),
        best: f64::INFINITY,
    });
}

/// Runs `budget` iterations after evaluating the initial design.
pub fn run<F: FnMut(&[f64]) -> f64>(
    config: &OptimizerConfig,
    region: &Region,
    mut objective: F,
    initial_design: &[Vec<f64>],
    budget: usize,
) -> Result<OptimizationTrace> {
    let grid = config.grid(region)?;
    let (mut history, mut trace) = start(config, region, &grid, &mut objective, initial_design)?;
    for iter in 1..=budget {
        let proposal = propose(config, &grid, &history)?;
        let y = evaluate_objective(&mut objective, &proposal.point)?;
        history.push(proposal.point.clone(), y)?;
        record(&mut trace, iter, &proposal, y);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Region {
        Region::interval(0.0, 1.0).unwrap()
    }

    #[test]
    fn grid_includes_corners_and_orders_lexicographically() {
        let r = Region::new(vec![0.0, -1.0], vec![1.0, 1.0]).unwrap();
        let g = CandidateGrid::new(&r, 3).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g.point(0), &[0.0, -1.0]);
        assert_eq!(g.point(1), &[0.0, 0.0]);
        assert_eq!(g.point(3), &[0.5, -1.0]);
        assert_eq!(g.point(8), &[1.0, 1.0]);
        for i in 0..g.len() {
            assert_eq!(g.index_of(g.point(i)), Some(i));
        }
        assert_eq!(g.index_of(&[0.25, 0.0]), None);
    }

    #[test]
    fn design_points_lie_on_default_grid() {
        let r = Region::interval(-1.0, 1.0).unwrap();
        let g = CandidateGrid::new(&r, 1001).unwrap();
        let idx: Vec<_> = default_initial_design(&r)
            .iter()
            .map(|x| g.index_of(x))
            .collect();
        assert_eq!(
            idx,
            vec![Some(0), Some(250), Some(500), Some(750), Some(1000)]
        );
        let r2 = Region::new(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap();
        let d2 = default_initial_design(&r2);
        assert_eq!(d2.len(), 5);
        assert_eq!(d2[4], vec![0.5, 1.0]);
    }

    fn value(v: f64) -> Option<CriterionValue> {
        Some(CriterionValue {
            kind: CriterionKind::PCriterion,
            value: v,
            degenerate: false,
        })
    }

    #[test]
    fn selection_rules() {
        assert_eq!(select_best(&[None, value(-3.0), None]), Some(1));
        assert_eq!(select_best(&[value(2.0), value(2.0)]), Some(0));
        assert_eq!(select_best(&[value(1.0), value(2.0), value(2.0)]), Some(1));
        let deg = Some(CriterionValue {
            kind: CriterionKind::PCriterion,
            value: f64::INFINITY,
            degenerate: true,
        });
        assert_eq!(select_best(&[deg, value(-1e9)]), Some(1));
        assert_eq!(select_best(&[deg, None]), None);
        assert_eq!(select_best(&[]), None);
    }

    #[test]
    fn zero_budget_is_identity() {
        let design = default_initial_design(&unit());
        let t = run(
            &OptimizerConfig::default(),
            &unit(),
            |x| x[0] * x[0],
            &design,
            0,
        )
        .unwrap();
        assert_eq!(t.rows.len(), 5);
        assert!(t.rows.iter().all(|r| r.iter == 0));
    }

    #[test]
    fn constant_objective_uses_fallback() {
        let design = default_initial_design(&unit());
        let t = run(&OptimizerConfig::default(), &unit(), |_| 2.5, &design, 4).unwrap();
        let sel: Vec<_> = t.iterations().collect();
        assert_eq!(sel.len(), 4);
        assert!(sel
            .iter()
            .all(|r| r.sigma2 == Some(0.0) && r.criterion.is_none()));
        assert_eq!(t.grid_indices(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn non_finite_objective_reports_point() {
        let design = default_initial_design(&unit());
        let err = run(
            &OptimizerConfig::default(),
            &unit(),
            |x| if x[0] > 0.6 { f64::NAN } else { x[0] },
            &design,
            3,
        )
        .unwrap_err();
        match err {
            Error::ObjectiveNonFinite { point, .. } => assert!(point[0] > 0.6),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn sample_estimator_needs_two_points() {
        let cfg = OptimizerConfig {
            estimator: Estimator::Sample,
            ..Default::default()
        };
        let err = run(&cfg, &unit(), |x| x[0], &[vec![0.5]], 1).unwrap_err();
        assert!(matches!(err, Error::InsufficientData { needed: 2, got: 1 }));
    }

    #[test]
    fn refinement_never_worsens_the_grid_winner() {
        let design = default_initial_design(&unit());
        let f = |x: &[f64]| (6.0 * x[0]).sin() + x[0];
        let values: Vec<f64> = design.iter().map(|x| f(x)).collect();
        let h = EvaluationHistory::new(unit(), design, values).unwrap();
        let post =
            SurrogatePosterior::build(&h, &CorrelationKernel::default(), Estimator::Mle).unwrap();
        let asp = acquisition::aspiration(&h, post.parameters(), 0.1).unwrap();
        let grid = CandidateGrid::new(&unit(), 101).unwrap();
        for kind in [
            CriterionKind::PCriterion,
            CriterionKind::ExpectedImprovement,
        ] {
            let coarse = argmax_criterion(kind, &post, &asp, &grid, false).unwrap();
            let fine = argmax_criterion(kind, &post, &asp, &grid, true).unwrap();
            assert_eq!(coarse.grid_index, fine.grid_index);
            assert!(fine.value.value >= coarse.value.value);
            assert!((fine.point[0] - coarse.point[0]).abs() <= 0.01 + 1e-15);
        }
    }
}
