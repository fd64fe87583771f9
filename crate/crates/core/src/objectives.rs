//! Built-in test objectives.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gp::Region;

/// Points of the tabulated planning example.
pub const FIG1_POINTS: [f64; 5] = [0.0, 0.2, 0.5, 0.9, 1.0];
/// Objective values at [`FIG1_POINTS`].
pub const FIG1_VALUES: [f64; 5] = [-0.8, -0.9, -0.65, -0.85, -0.55];
/// The second data set as printed (rounded to two decimals).
pub const FIG1_PRINTED_PHI: [f64; 5] = [0.0, -0.4, 0.6, -0.2, 0.99];
pub const FIG1_A: f64 = 3.9765;
pub const FIG1_B: f64 = 3.1804;

#[derive(Clone, Copy, Debug)]
pub struct Objective {
    pub name: &'static str,
    lower: &'static [f64],
    upper: &'static [f64],
    f: fn(&[f64]) -> f64,
}

impl Objective {
    pub fn region(&self) -> Region {
        Region::new(self.lower.to_vec(), self.upper.to_vec()).expect("built-in region is valid")
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

fn sin3x(x: &[f64]) -> f64 {
    (3.0 * x[0]).sin() + x[0] * x[0]
}

fn rastrigin(x: &[f64]) -> f64 {
    10.0 + x[0] * x[0] - 10.0 * (2.0 * PI * x[0]).cos()
}

fn gramacy_lee(x: &[f64]) -> f64 {
    (10.0 * PI * x[0]).sin() / (2.0 * x[0]) + (x[0] - 1.0).powi(4)
}

fn quadratic(x: &[f64]) -> f64 {
    (x[0] - 0.3).powi(2) + 1.0
}

fn branin(x: &[f64]) -> f64 {
    let (u, v) = (x[0], x[1]);
    let b = 5.1 / (4.0 * PI * PI);
    let c = 5.0 / PI;
    let t = 1.0 / (8.0 * PI);
    (v - b * u * u + c * u - 6.0).powi(2) + 10.0 * (1.0 - t) * u.cos() + 10.0
}

const BUILTINS: &[Objective] = &[
    Objective {
        name: "sin3x",
        lower: &[-1.0],
        upper: &[1.0],
        f: sin3x,
    },
    Objective {
        name: "rastrigin1d",
        lower: &[-5.12],
        upper: &[5.12],
        f: rastrigin,
    },
    Objective {
        name: "gramacy-lee",
        lower: &[0.5],
        upper: &[2.5],
        f: gramacy_lee,
    },
    Objective {
        name: "quadratic",
        lower: &[0.0],
        upper: &[1.0],
        f: quadratic,
    },
    Objective {
        name: "branin",
        lower: &[-5.0, 0.0],
        upper: &[10.0, 15.0],
        f: branin,
    },
];

/// The three 1-D multimodal objectives used by the invariance suites.
pub const HOMOGENEITY_SUITE: [&str; 3] = ["sin3x", "rastrigin1d", "gramacy-lee"];

pub fn names() -> Vec<&'static str> {
    BUILTINS.iter().map(|o| o.name).collect()
}

pub fn builtin(name: &str) -> Result<Objective> {
    BUILTINS
        .iter()
        .find(|o| o.name == name)
        .copied()
        .ok_or_else(|| {
            Error::InvalidConfig(format!(
                "unknown objective '{name}' (known: {}, fig1)",
                names().join(", ")
            ))
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_minima() {
        assert!((builtin("rastrigin1d").unwrap().eval(&[0.0])).abs() < 1e-12);
        assert_eq!(builtin("quadratic").unwrap().eval(&[0.3]), 1.0);
        let br = builtin("branin").unwrap();
        assert!((br.eval(&[PI, 2.275]) - 0.397887).abs() < 1e-5);
        assert!(builtin("nope").is_err());
    }

    #[test]
    fn fig1_constants_consistent() {
        for (f, phi) in FIG1_VALUES.iter().zip(FIG1_PRINTED_PHI) {
            assert!((FIG1_A * f + FIG1_B - phi).abs() <= 5e-3);
        }
    }
}
