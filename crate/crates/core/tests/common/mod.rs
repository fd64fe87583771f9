//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the library's linear algebra.

#![allow(dead_code)]

use homopt::direct::DirectPartition;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Values frozen from a 50-digit evaluation of the tabulated five-point
/// example (exponential kernel, c = 5).
pub const FIG1_MLE_MU: f64 = -0.741_895_204_469_134_981_09;
pub const FIG1_MLE_SIGMA2: f64 = 0.032_336_910_989_003_809_537;
pub const FIG1_M_AT_035: f64 = -0.767_465_006_692_331_240_5;
pub const FIG1_S2_AT_035: f64 = 0.020_538_755_138_106_728_72;
pub const FIG1_SAMPLE_MU: f64 = -0.75;
pub const FIG1_SAMPLE_SIGMA2: f64 = 0.02125;

pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(f64::MIN_POSITIVE)
}

/// `exp(-c * |d|)` or `exp(-c * |d|^2)` with Euclidean `|d|`.
pub fn kernel(squared: bool, c: f64, a: &[f64], b: &[f64]) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    if squared {
        (-c * d2).exp()
    } else {
        (-c * d2.sqrt()).exp()
    }
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn gauss_jordan_inverse(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        let p = a[col][col];
        assert!(p != 0.0, "singular matrix");
        for v in a[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    for k in 0..2 * n {
                        a[r][k] -= f * a[col][k];
                    }
                }
            }
        }
    }
    a.into_iter().map(|r| r[n..].to_vec()).collect()
}

fn matvec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub struct OracleModel {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub inverse: Vec<Vec<f64>>,
    pub squared: bool,
    pub c: f64,
    pub mu: f64,
    pub sigma2: f64,
}

impl OracleModel {
    pub fn new(points: &[Vec<f64>], values: &[f64], squared: bool, c: f64, mle: bool) -> Self {
        let n = points.len();
        let sigma: Vec<Vec<f64>> = points
            .iter()
            .map(|p| points.iter().map(|q| kernel(squared, c, p, q)).collect())
            .collect();
        let inverse = gauss_jordan_inverse(&sigma);
        let (mu, sigma2) = if mle {
            let ones = vec![1.0; n];
            let si1 = matvec(&inverse, &ones);
            let denom: f64 = si1.iter().sum();
            let mu = dot(&si1, values) / denom;
            let r: Vec<f64> = values.iter().map(|y| y - mu).collect();
            (mu, dot(&r, &matvec(&inverse, &r)) / n as f64)
        } else {
            let mu = values.iter().sum::<f64>() / n as f64;
            let ss: f64 = values.iter().map(|y| (y - mu) * (y - mu)).sum();
            (mu, ss / (n as f64 - 1.0))
        };
        OracleModel {
            points: points.to_vec(),
            values: values.to_vec(),
            inverse,
            squared,
            c,
            mu,
            sigma2,
        }
    }

    /// Conditional mean and (unclamped) variance.
    pub fn moments(&self, x: &[f64]) -> (f64, f64) {
        let u: Vec<f64> = self
            .points
            .iter()
            .map(|p| kernel(self.squared, self.c, p, x))
            .collect();
        let r: Vec<f64> = self.values.iter().map(|y| y - self.mu).collect();
        let siu = matvec(&self.inverse, &u);
        (self.mu + dot(&siu, &r), self.sigma2 * (1.0 - dot(&siu, &u)))
    }
}

fn simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(&f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `E[max(y_on - Y, 0)]` for `Y ~ N(m, s^2)` by quadrature of the
/// standardized integrand `(u - t) phi(t)` over `t < u`.
pub fn ei_quadrature(y_on: f64, m: f64, s: f64) -> f64 {
    let u = (y_on - m) / s;
    let phi = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let upper = u.min(40.0);
    let mut total = 0.0;
    // Unit panels keep the adaptive rule from skipping the density bulk.
    let mut edges: Vec<f64> = (-40..40)
        .map(f64::from)
        .take_while(|e| *e < upper)
        .collect();
    edges.push(upper);
    for w in edges.windows(2) {
        total += integrate(|t| (u - t) * phi(t), w[0], w[1], 1e-14);
    }
    // Mass above 40 is below 1e-340; for u > 40 the remaining piece is
    // (u - t) phi(t) on [40, u], equally negligible.
    s * total
}

/// Potential optimality of interval `j` decided directly from the raw
/// conditions on a dense set of rate constants `L`:
///   f(c_j) - L d_j <= f(c_i) - L d_i for every i, and
///   f(c_j) - L d_j <= f_min - eps |f_min|,
/// each with an absolute value slack of `1e-12 * scale`.
pub fn dense_l_potentially_optimal(p: &DirectPartition, j: usize) -> bool {
    let ivs = p.intervals();
    let t = ivs[j];
    let f_min = p.f_min();
    let eps = p.epsilon();
    let scale = ivs.iter().map(|iv| iv.fc.abs()).fold(1.0, f64::max);
    let slack = 1e-12 * scale;
    let mut ls: Vec<f64> = (0..=1600)
        .map(|k| 10f64.powf(-8.0 + k as f64 * 0.01))
        .collect();
    for iv in ivs {
        if iv.delta != t.delta {
            let l = (t.fc - iv.fc) / (t.delta - iv.delta);
            if l > 0.0 {
                ls.push(l);
            }
        }
    }
    let l_a = (t.fc - f_min + eps * f_min.abs()) / t.delta;
    if l_a > 0.0 {
        ls.push(l_a);
    }
    ls.iter().any(|&l| {
        let lhs = t.fc - l * t.delta;
        lhs <= f_min - eps * f_min.abs() + slack
            && ivs.iter().all(|iv| lhs <= iv.fc - l * iv.delta + slack)
    })
}

/// Random partition of `[0, 1]`-ish tilings made of DIRECT-like lengths
/// `3^-k`, with values drawn from a coarse set so ties occur.
pub fn random_partition(rng: &mut ChaCha8Rng, eps: f64) -> DirectPartition {
    let n = rng.gen_range(1..=12);
    let pieces: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let k = rng.gen_range(0..5);
            let len = 3f64.powi(-k);
            let fc = if rng.gen_bool(0.3) {
                rng.gen_range(0..8) as f64 * 0.25 + 0.5
            } else {
                rng.gen_range(-2.0..3.0)
            };
            (len, fc)
        })
        .collect();
    DirectPartition::from_lengths(0.0, &pieces, eps).unwrap()
}

/// `n` distinct points in the unit box of dimension `d`, with values.
pub fn random_history(rng: &mut ChaCha8Rng, n: usize, d: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(n);
    while points.len() < n {
        let p: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..1.0)).collect();
        if points.iter().all(|q| {
            q.iter()
                .zip(&p)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                > 1e-3
        }) {
            points.push(p);
        }
    }
    let values = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
    (points, values)
}
