use homopt::homogeneity::compare_extended;
use homopt::numeral::ExtendedNumeral;
use homopt::objectives::{builtin, FIG1_POINTS, FIG1_VALUES};
use homopt::optimizer::{default_initial_design, run, Algorithm, OptimizerConfig};
use homopt::scaled::{scaled_criterion_run, COLLAPSE_TOL};
use homopt::{Error, Estimator, Region};

fn num(s: &str) -> ExtendedNumeral {
    s.parse().unwrap()
}

#[test]
fn infinite_scale_reproduces_conventional_run() {
    let o = builtin("sin3x").unwrap();
    let region = o.region();
    let design = default_initial_design(&region);
    for algorithm in [Algorithm::PAlgorithm, Algorithm::OneStepBayes] {
        let config = OptimizerConfig {
            algorithm,
            ..OptimizerConfig::default()
        };
        let base = run(&config, &region, |x| o.eval(x), &design, 10).unwrap();
        let ext = scaled_criterion_run(
            &config,
            &region,
            |x| o.eval(x),
            &num("G"),
            &num("G^2"),
            &design,
            10,
        )
        .unwrap();
        assert_eq!(base.grid_indices(), ext.trace.grid_indices());
        for c in &ext.certificates {
            assert!(c.max_residue <= COLLAPSE_TOL);
            assert!(c.max_deviation <= 1e-9, "{}", c.max_deviation);
            assert!(c.variance_mismatch <= 1e-9);
            assert!(
                c.z_on.leading().unwrap().0 == 2,
                "z_on keeps the G^2 offset"
            );
        }
        // Values are lifted exactly.
        for (row, z) in ext.trace.rows.iter().zip(&ext.scaled_values) {
            assert_eq!(z.coefficient(1), row.y);
            assert_eq!(z.coefficient(2), 1.0);
        }
    }
}

#[test]
fn infinitesimal_scale_and_mixed_offset() {
    let o = builtin("gramacy-lee").unwrap();
    let region = o.region();
    let design = default_initial_design(&region);
    for est in [Estimator::Mle, Estimator::Sample] {
        let config = OptimizerConfig {
            estimator: est,
            ..OptimizerConfig::default()
        };
        let rep = compare_extended(
            &config,
            &region,
            |x| o.eval(x),
            &num("0.5*G^-2"),
            &num("3*G - 7 + G^-1"),
            &design,
            8,
        )
        .unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert_eq!(rep.steps.len(), 8);
    }
}

#[test]
fn fig1_table_extended_selects_same_point() {
    let region = Region::interval(0.0, 1.0).unwrap();
    let design: Vec<Vec<f64>> = FIG1_POINTS.iter().map(|x| vec![*x]).collect();
    let table = |x: &[f64]| {
        FIG1_POINTS
            .iter()
            .position(|p| *p == x[0])
            .map_or(0.0, |i| FIG1_VALUES[i])
    };
    let config = OptimizerConfig {
        resolution: Some(1001),
        ..OptimizerConfig::default()
    };
    let base = run(&config, &region, table, &design, 1).unwrap();
    let ext =
        scaled_criterion_run(&config, &region, table, &num("G"), &num("G^2"), &design, 1).unwrap();
    assert_eq!(base.grid_indices(), ext.trace.grid_indices());
}

#[test]
fn unsupported_scales_are_rejected() {
    let o = builtin("sin3x").unwrap();
    let region = o.region();
    let design = default_initial_design(&region);
    let config = OptimizerConfig::default();
    for a in ["G + 1", "-G", "0", "-2"] {
        let r = scaled_criterion_run(
            &config,
            &region,
            |x| o.eval(x),
            &num(a),
            &num("0"),
            &design,
            2,
        );
        assert!(matches!(r, Err(Error::UnsupportedScale(_))), "a = {a}");
    }
}

#[test]
fn finite_numerals_take_the_same_path() {
    let o = builtin("rastrigin1d").unwrap();
    let region = o.region();
    let design = default_initial_design(&region);
    let config = OptimizerConfig::default();
    let rep = compare_extended(
        &config,
        &region,
        |x| o.eval(x),
        &num("3.9765"),
        &num("3.1804"),
        &design,
        10,
    )
    .unwrap();
    assert!(rep.passed());
}
