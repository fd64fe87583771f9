//! One planning step on a fixed table of values, for `f` and `a * f + b`
//! side by side. The tabulated five-point example is the built-in case.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::acquisition::{self, AspirationLevel, CriterionKind};
use crate::error::{Error, Result};
use crate::gp::{Estimator, EvaluationHistory, ModelParameters, Region, SurrogatePosterior};
use crate::objectives::{FIG1_A, FIG1_B, FIG1_POINTS, FIG1_PRINTED_PHI, FIG1_VALUES};
use crate::optimizer::{self, OptimizerConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub m_f: f64,
    pub s_f: f64,
    pub crit_f: f64,
    pub m_phi: f64,
    pub s_phi: f64,
    pub crit_phi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedDesignPlan {
    pub a: f64,
    pub b: f64,
    pub params_f: ModelParameters,
    pub params_phi: ModelParameters,
    pub aspiration_f: AspirationLevel,
    pub aspiration_phi: AspirationLevel,
    /// `|z_on - (a * y_on + b)| / max(|z_on|, tiny)`.
    pub aspiration_rel_error: f64,
    /// Largest `|crit_f - crit_phi / k| / max(1, |crit_f|)` over the grid,
    /// with `k = 1` for the P-criterion and `k = a` for EI.
    pub max_curve_deviation: f64,
    pub argmax_f: usize,
    pub argmax_phi: usize,
    pub next_point: Vec<f64>,
    pub curve: Vec<CurvePoint>,
}

impl FixedDesignPlan {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        for p in &self.curve {
            w.serialize(p)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Scores a 1-D grid for the table `(points, values)` and for
/// `a * values + b`, and reports the next point each would choose.
pub fn plan_fixed_design(
    config: &OptimizerConfig,
    region: &Region,
    points: &[f64],
    values: &[f64],
    a: f64,
    b: f64,
) -> Result<FixedDesignPlan> {
    if region.dim() != 1 {
        return Err(Error::InvalidConfig(
            "fixed-design planning is one-dimensional".into(),
        ));
    }
    if !(a.is_finite() && a > 0.0 && b.is_finite()) {
        return Err(Error::UnsupportedScale(format!(
            "need finite a > 0 and finite b, got a = {a}, b = {b}"
        )));
    }
    let xs: Vec<Vec<f64>> = points.iter().map(|x| vec![*x]).collect();
    let hist_f = EvaluationHistory::new(region.clone(), xs, values.to_vec())?;
    let hist_phi = hist_f.with_values(values.iter().map(|y| a * y + b).collect())?;
    let post_f = SurrogatePosterior::build(&hist_f, &config.kernel, config.estimator)?;
    let post_phi = SurrogatePosterior::build(&hist_phi, &config.kernel, config.estimator)?;
    let asp_f = acquisition::aspiration(&hist_f, post_f.parameters(), config.epsilon)?;
    let asp_phi = acquisition::aspiration(&hist_phi, post_phi.parameters(), config.epsilon)?;
    let expected = a * asp_f.y_on + b;
    let aspiration_rel_error =
        (asp_phi.y_on - expected).abs() / asp_phi.y_on.abs().max(f64::MIN_POSITIVE);

    let kind = config.algorithm.criterion();
    let unscale = match kind {
        CriterionKind::PCriterion => 1.0,
        CriterionKind::ExpectedImprovement => a,
    };
    let grid = config.grid(region)?;
    let mut curve = Vec::with_capacity(grid.len());
    let mut max_dev: f64 = 0.0;
    for x in grid.points() {
        let mf = post_f.conditional_moments(x);
        let mp = post_phi.conditional_moments(x);
        let cf = acquisition::evaluate(kind, &post_f, &asp_f, x);
        let cp = acquisition::evaluate(kind, &post_phi, &asp_phi, x);
        let dev = match (cf.degenerate, cp.degenerate) {
            (false, false) => (cf.value - cp.value / unscale).abs() / cf.value.abs().max(1.0),
            (true, true) if cf.value == cp.value / unscale => 0.0,
            _ => f64::INFINITY,
        };
        max_dev = max_dev.max(dev);
        curve.push(CurvePoint {
            x: x[0],
            m_f: mf.mean,
            s_f: mf.std_dev(),
            crit_f: cf.value,
            m_phi: mp.mean,
            s_phi: mp.std_dev(),
            crit_phi: cp.value,
        });
    }
    let argmax_f = optimizer::select_best(&optimizer::score_grid(kind, &post_f, &asp_f, &grid))
        .ok_or(Error::AllCandidatesDegenerate)?;
    let argmax_phi =
        optimizer::select_best(&optimizer::score_grid(kind, &post_phi, &asp_phi, &grid))
            .ok_or(Error::AllCandidatesDegenerate)?;
    Ok(FixedDesignPlan {
        a,
        b,
        params_f: *post_f.parameters(),
        params_phi: *post_phi.parameters(),
        aspiration_f: asp_f,
        aspiration_phi: asp_phi,
        aspiration_rel_error,
        max_curve_deviation: max_dev,
        argmax_f,
        argmax_phi,
        next_point: grid.point(argmax_f).to_vec(),
        curve,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig1Report {
    /// Largest `|printed - (a * f + b)|` over the five tabulated values.
    pub printed_max_deviation: f64,
    pub plan: FixedDesignPlan,
}

/// The five-point example on `[0, 1]` with the default kernel and a
/// 1001-point grid. Estimator and epsilon are free.
pub fn example_fig1(estimator: Estimator, epsilon: f64) -> Result<Fig1Report> {
    let config = OptimizerConfig {
        estimator,
        epsilon,
        resolution: Some(1001),
        ..OptimizerConfig::default()
    };
    let region = Region::interval(0.0, 1.0)?;
    let printed_max_deviation = FIG1_VALUES
        .iter()
        .zip(FIG1_PRINTED_PHI)
        .map(|(f, p)| (p - (FIG1_A * f + FIG1_B)).abs())
        .fold(0.0, f64::max);
    let plan = plan_fixed_design(&config, &region, &FIG1_POINTS, &FIG1_VALUES, FIG1_A, FIG1_B)?;
    Ok(Fig1Report {
        printed_max_deviation,
        plan,
    })
}
