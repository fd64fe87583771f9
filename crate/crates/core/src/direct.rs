//! One-dimensional DIRECT.
//!
//! The feasible interval is kept as a sorted tiling of subintervals, each
//! sampled at its midpoint. An interval is potentially optimal when some
//! Lipschitz constant `L > 0` makes its lower bound `f(c_j) - L * delta_j`
//! the smallest of all and at least `eps * |f_min|` below `f_min`. All
//! potentially optimal intervals are trisected every iteration.
//!
//! The same test also drives [`counterexample_shift`]: for a potentially
//! optimal interval that is not the longest, it returns the shift threshold
//! beyond which adding a constant to every value destroys potential
//! optimality. DIRECT is therefore not invariant under translation of the
//! objective values.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_DIRECT_EPSILON: f64 = 1e-4;

/// Slack applied to the `L_lo <= L_hi` comparison.
pub const FEASIBILITY_SLACK: f64 = 1e-12;

/// Half-lengths closer than this (relative) are treated as equal.
const LENGTH_MERGE_REL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
    /// Midpoint `(a + b) / 2`.
    pub c: f64,
    /// Half-length `(b - a) / 2`.
    pub delta: f64,
    /// Objective value at `c`.
    pub fc: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64, fc: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidConfig(format!("invalid interval [{a}, {b}]")));
        }
        if !fc.is_finite() {
            return Err(Error::ObjectiveNonFinite {
                point: vec![0.5 * (a + b)],
                value: fc,
            });
        }
        Ok(Interval {
            a,
            b,
            c: 0.5 * (a + b),
            delta: 0.5 * (b - a),
            fc,
        })
    }

    /// Left, middle and right thirds. The middle third keeps `c` and `fc`;
    /// the outer thirds carry placeholder values until evaluated.
    fn trisect(&self) -> [Interval; 3] {
        let delta = self.delta / 3.0;
        let inner_a = self.c - delta;
        let inner_b = self.c + delta;
        [
            Interval {
                a: self.a,
                b: inner_a,
                c: self.c - 2.0 * delta,
                delta,
                fc: f64::NAN,
            },
            Interval {
                a: inner_a,
                b: inner_b,
                c: self.c,
                delta,
                fc: self.fc,
            },
            Interval {
                a: inner_b,
                b: self.b,
                c: self.c + 2.0 * delta,
                delta,
                fc: f64::NAN,
            },
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DirectPartition {
    intervals: Vec<Interval>,
    f_min: f64,
    epsilon: f64,
}

impl DirectPartition {
    /// Validates that `intervals` tile a single interval in order.
    pub fn new(mut intervals: Vec<Interval>, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must lie in (0, 1), got {epsilon}"
            )));
        }
        if intervals.is_empty() {
            return Err(Error::InvalidConfig(
                "partition must hold at least one interval".into(),
            ));
        }
        for w in intervals.windows(2) {
            let gap = (w[1].a - w[0].b).abs();
            if gap > 1e-12 * (1.0 + w[0].b.abs()) {
                return Err(Error::InvalidConfig(format!(
                    "intervals [{}, {}] and [{}, {}] are not contiguous",
                    w[0].a, w[0].b, w[1].a, w[1].b
                )));
            }
        }
        if let Some(iv) = intervals.iter().find(|iv| !iv.fc.is_finite()) {
            return Err(Error::ObjectiveNonFinite {
                point: vec![iv.c],
                value: iv.fc,
            });
        }
        canonicalize_lengths(&mut intervals);
        let f_min = intervals
            .iter()
            .map(|iv| iv.fc)
            .fold(f64::INFINITY, f64::min);
        Ok(DirectPartition {
            intervals,
            f_min,
            epsilon,
        })
    }

    /// Builds a contiguous tiling starting at `start` from `(length, fc)` pairs.
    pub fn from_lengths(start: f64, pieces: &[(f64, f64)], epsilon: f64) -> Result<Self> {
        let mut a = start;
        let mut intervals = Vec::with_capacity(pieces.len());
        for &(len, fc) in pieces {
            let b = a + len;
            intervals.push(Interval::new(a, b, fc)?);
            a = b;
        }
        Self::new(intervals, epsilon)
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn f_min(&self) -> f64 {
        self.f_min
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn lower(&self) -> f64 {
        self.intervals[0].a
    }

    pub fn upper(&self) -> f64 {
        self.intervals[self.intervals.len() - 1].b
    }

    /// Copy with every value shifted by `shift` (and `f_min` recomputed).
    pub fn shifted(&self, shift: f64) -> Result<Self> {
        let intervals = self
            .intervals
            .iter()
            .map(|iv| Interval {
                fc: iv.fc + shift,
                ..*iv
            })
            .collect();
        Self::new(intervals, self.epsilon)
    }

    pub fn snapshot(&self) -> PartitionSnapshot {
        PartitionSnapshot {
            epsilon: self.epsilon,
            f_min: self.f_min,
            intervals: self
                .intervals
                .iter()
                .map(|iv| IntervalRecord {
                    a: iv.a,
                    b: iv.b,
                    fc: iv.fc,
                })
                .collect(),
        }
    }
}

/// Snaps half-lengths that agree to `LENGTH_MERGE_REL` onto one value so
/// that "same length" is an exact comparison afterwards.
fn canonicalize_lengths(intervals: &mut [Interval]) {
    let mut reps: Vec<f64> = Vec::new();
    for iv in intervals.iter_mut() {
        match reps
            .iter()
            .find(|r| (**r - iv.delta).abs() <= LENGTH_MERGE_REL * r.abs().max(iv.delta.abs()))
        {
            Some(r) => iv.delta = *r,
            None => reps.push(iv.delta),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalRecord {
    pub a: f64,
    pub b: f64,
    pub fc: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionSnapshot {
    pub epsilon: f64,
    pub f_min: f64,
    pub intervals: Vec<IntervalRecord>,
}

/// Why an interval failed the potential-optimality test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Violation {
    /// An interval of the same length has a strictly smaller value.
    SameLengthDominated { by: usize },
    /// A longer interval has a value no larger, so only `L <= 0` would do.
    NonPositiveUpper { l_hi: f64, by: usize },
    /// The lower bound on `L` exceeds the upper bound.
    EmptyRange { l_lo: f64, l_hi: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Witness {
    /// Every `L` in `[max(l_lo, 0+), l_hi]` works.
    Feasible {
        l_lo: f64,
        l_hi: f64,
    },
    Violated(Violation),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decision {
    pub optimal: bool,
    pub witness: Witness,
}

/// Potential-optimality test for interval `j`.
///
/// Lower bounds on `L` come from every shorter interval and from the
/// required improvement over `f_min`; upper bounds from every longer one.
/// Equal-length intervals impose `f(c_j) <= f(c_i)` directly.
pub fn potentially_optimal(partition: &DirectPartition, j: usize) -> Decision {
    let ivs = partition.intervals();
    let target = ivs[j];
    let f_min = partition.f_min();
    let eps = partition.epsilon();

    let mut l_lo = (target.fc - f_min + eps * f_min.abs()) / target.delta;
    let mut l_hi = f64::INFINITY;
    let mut hi_by = None;
    for (i, iv) in ivs.iter().enumerate() {
        if i == j {
            continue;
        }
        if iv.delta == target.delta {
            if iv.fc < target.fc {
                return Decision {
                    optimal: false,
                    witness: Witness::Violated(Violation::SameLengthDominated { by: i }),
                };
            }
        } else if iv.delta < target.delta {
            l_lo = l_lo.max((target.fc - iv.fc) / (target.delta - iv.delta));
        } else {
            let bound = (iv.fc - target.fc) / (iv.delta - target.delta);
            if bound < l_hi {
                l_hi = bound;
                hi_by = Some(i);
            }
        }
    }
    if l_hi <= 0.0 {
        return Decision {
            optimal: false,
            witness: Witness::Violated(Violation::NonPositiveUpper {
                l_hi,
                by: hi_by.expect("finite upper bound has a source"),
            }),
        };
    }
    let l_lo = l_lo.max(0.0);
    let feasible = l_hi.is_infinite() || l_lo <= l_hi + FEASIBILITY_SLACK * l_hi.abs().max(1.0);
    Decision {
        optimal: feasible,
        witness: if feasible {
            Witness::Feasible { l_lo, l_hi }
        } else {
            Witness::Violated(Violation::EmptyRange { l_lo, l_hi })
        },
    }
}

/// Indices of all potentially optimal intervals, in position order.
pub fn potentially_optimal_set(partition: &DirectPartition) -> Vec<usize> {
    (0..partition.len())
        .filter(|&j| potentially_optimal(partition, j).optimal)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleShift {
    /// The shift threshold numerator; any shift above `delta_f / epsilon`
    /// makes the interval lose potential optimality.
    pub delta_f: f64,
    /// Value of the longer interval attaining the upper bound on `L`.
    pub f_plus: f64,
    /// Half-length of that interval.
    pub delta_plus: f64,
    pub epsilon: f64,
}

impl CounterexampleShift {
    pub fn threshold(&self) -> f64 {
        self.delta_f / self.epsilon
    }
}

/// Computes `delta_f` for a potentially optimal, not-longest interval `j`
/// of a partition with strictly positive values.
pub fn counterexample_shift(partition: &DirectPartition, j: usize) -> Result<CounterexampleShift> {
    let ivs = partition.intervals();
    if j >= ivs.len() {
        return Err(Error::Precondition(format!(
            "interval index {j} out of range for {} intervals",
            ivs.len()
        )));
    }
    if let Some((i, iv)) = ivs.iter().enumerate().find(|(_, iv)| iv.fc <= 0.0) {
        return Err(Error::Precondition(format!(
            "all values must be positive; interval {i} has f(c) = {}",
            iv.fc
        )));
    }
    let target = ivs[j];
    let upper = ivs
        .iter()
        .filter(|iv| iv.delta > target.delta)
        .map(|iv| ((iv.fc - target.fc) / (iv.delta - target.delta), iv))
        .fold(None::<(f64, &Interval)>, |acc, (r, iv)| match acc {
            Some((best, _)) if best <= r => acc,
            _ => Some((r, iv)),
        });
    let Some((_, plus)) = upper else {
        return Err(Error::Precondition(format!(
            "interval {j} is a longest interval; no longer interval bounds L from above"
        )));
    };
    let decision = potentially_optimal(partition, j);
    if !decision.optimal {
        return Err(Error::Precondition(format!(
            "interval {j} is not potentially optimal ({:?})",
            decision.witness
        )));
    }
    let eps = partition.epsilon();
    let f_min = partition.f_min();
    let delta_f = (plus.fc - target.fc) * target.delta / (plus.delta - target.delta) - target.fc
        + (1.0 - eps) * f_min;
    Ok(CounterexampleShift {
        delta_f,
        f_plus: plus.fc,
        delta_plus: plus.delta,
        epsilon: eps,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectIteration {
    pub iter: usize,
    /// Positions (before subdivision) of the intervals that were trisected.
    pub subdivided: Vec<usize>,
    pub f_min: f64,
    pub n_intervals: usize,
}

/// Resumable DIRECT run on a fixed objective.
#[derive(Clone, Debug)]
pub struct DirectState {
    partition: DirectPartition,
    iterations: Vec<DirectIteration>,
}

impl DirectState {
    pub fn start<F: FnMut(f64) -> f64>(
        objective: &mut F,
        lower: f64,
        upper: f64,
        epsilon: f64,
    ) -> Result<Self> {
        let c = 0.5 * (lower + upper);
        let fc = eval(objective, c)?;
        let partition = DirectPartition::new(vec![Interval::new(lower, upper, fc)?], epsilon)?;
        Ok(DirectState {
            partition,
            iterations: Vec::new(),
        })
    }

    pub fn partition(&self) -> &DirectPartition {
        &self.partition
    }

    pub fn iterations(&self) -> &[DirectIteration] {
        &self.iterations
    }

    /// Subdivides every potentially optimal interval once.
    pub fn step<F: FnMut(f64) -> f64>(&mut self, objective: &mut F) -> Result<&DirectIteration> {
        let selected = potentially_optimal_set(&self.partition);
        let mut next = Vec::with_capacity(self.partition.len() + 2 * selected.len());
        let mut pick = selected.iter().peekable();
        for (i, iv) in self.partition.intervals().iter().enumerate() {
            if pick.peek() == Some(&&i) {
                pick.next();
                let [mut left, mid, mut right] = iv.trisect();
                left.fc = eval(objective, left.c)?;
                right.fc = eval(objective, right.c)?;
                next.extend([left, mid, right]);
            } else {
                next.push(*iv);
            }
        }
        self.partition = DirectPartition::new(next, self.partition.epsilon())?;
        self.iterations.push(DirectIteration {
            iter: self.iterations.len() + 1,
            subdivided: selected,
            f_min: self.partition.f_min(),
            n_intervals: self.partition.len(),
        });
        Ok(self.iterations.last().expect("just pushed"))
    }
}

fn eval<F: FnMut(f64) -> f64>(objective: &mut F, x: f64) -> Result<f64> {
    let y = objective(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::ObjectiveNonFinite {
            point: vec![x],
            value: y,
        })
    }
}

#[derive(Clone, Debug)]
pub struct DirectRun {
    pub partition: DirectPartition,
    pub trace: Vec<DirectIteration>,
}

pub fn run_direct<F: FnMut(f64) -> f64>(
    mut objective: F,
    lower: f64,
    upper: f64,
    epsilon: f64,
    budget: usize,
) -> Result<DirectRun> {
    if budget == 0 {
        return Err(Error::InvalidConfig(
            "DIRECT budget must be at least 1".into(),
        ));
    }
    let mut state = DirectState::start(&mut objective, lower, upper, epsilon)?;
    for _ in 0..budget {
        state.step(&mut objective)?;
    }
    Ok(DirectRun {
        partition: state.partition,
        trace: state.iterations,
    })
}

pub fn write_direct_trace_csv<W: Write>(trace: &[DirectIteration], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["iter", "subdivided_indices", "f_min", "n_intervals"])?;
    for it in trace {
        let idx: Vec<String> = it.subdivided.iter().map(|i| i.to_string()).collect();
        w.write_record([
            it.iter.to_string(),
            idx.join(";"),
            it.f_min.to_string(),
            it.n_intervals.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// A translation `f + shift` under which DIRECT subdivides a different set
/// than on `f` at some iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftInstance {
    /// Iteration (1-based) whose partition contains the witness interval.
    pub iteration: usize,
    pub interval: usize,
    pub shift: CounterexampleShift,
    /// The translation actually applied, `1.01 * delta_f / epsilon`.
    pub delta: f64,
    pub before: PartitionSnapshot,
}

/// Runs DIRECT on `objective` and returns the first iteration at which a
/// potentially optimal interval that is not the longest can be knocked out
/// by a translation. Requires a positive objective.
pub fn construct_shift_instance<F: FnMut(f64) -> f64>(
    mut objective: F,
    lower: f64,
    upper: f64,
    epsilon: f64,
    max_iterations: usize,
) -> Result<Option<ShiftInstance>> {
    let mut state = DirectState::start(&mut objective, lower, upper, epsilon)?;
    for iteration in 1..=max_iterations {
        let partition = state.partition();
        if partition.intervals().iter().all(|iv| iv.fc > 0.0) {
            for j in potentially_optimal_set(partition) {
                if let Ok(shift) = counterexample_shift(partition, j) {
                    let delta = if shift.delta_f > 0.0 {
                        1.01 * shift.threshold()
                    } else {
                        f64::EPSILON * partition.f_min().abs().max(1.0)
                    };
                    return Ok(Some(ShiftInstance {
                        iteration,
                        interval: j,
                        shift,
                        delta,
                        before: partition.snapshot(),
                    }));
                }
            }
        }
        state.step(&mut objective)?;
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hand_instance() -> DirectPartition {
        DirectPartition::from_lengths(0.0, &[(1.0 / 3.0, 1.0), (1.0, 1.2), (1.0 / 3.0, 1.1)], 0.01)
            .unwrap()
    }

    #[test]
    fn single_interval_is_potentially_optimal() {
        let p = DirectPartition::from_lengths(0.0, &[(1.0, 3.0)], 1e-4).unwrap();
        let d = potentially_optimal(&p, 0);
        assert!(d.optimal);
        assert!(matches!(d.witness, Witness::Feasible { l_hi, .. } if l_hi.is_infinite()));
    }

    #[test]
    fn equal_lengths_favor_smaller_value() {
        let p = DirectPartition::from_lengths(0.0, &[(0.5, 2.0), (0.5, 1.0)], 1e-4).unwrap();
        assert!(!potentially_optimal(&p, 0).optimal);
        assert!(potentially_optimal(&p, 1).optimal);
        assert_eq!(
            potentially_optimal(&p, 0).witness,
            Witness::Violated(Violation::SameLengthDominated { by: 1 })
        );
    }

    #[test]
    fn longer_interval_with_no_larger_value_dominates() {
        let p = DirectPartition::from_lengths(0.0, &[(1.0 / 3.0, 1.0), (1.0, 1.0)], 1e-4).unwrap();
        assert!(!potentially_optimal(&p, 0).optimal);
        assert!(potentially_optimal(&p, 1).optimal);
    }

    #[test]
    fn hand_counterexample() {
        let p = hand_instance();
        assert_eq!(p.intervals()[0].delta, p.intervals()[2].delta);
        assert!(potentially_optimal(&p, 0).optimal);
        let s = counterexample_shift(&p, 0).unwrap();
        assert_eq!(s.f_plus, 1.2);
        assert!((s.delta_plus - 0.5).abs() < 1e-15);
        assert!((s.delta_f - 0.09).abs() < 1e-12);
        let shifted = p.shifted(s.delta_f / 0.01 + 1.0).unwrap();
        assert!(!potentially_optimal(&shifted, 0).optimal);
    }

    #[test]
    fn counterexample_preconditions() {
        let p = hand_instance();
        // Interval 1 is the longest.
        assert!(matches!(
            counterexample_shift(&p, 1),
            Err(Error::Precondition(_))
        ));
        // Interval 2 is dominated by interval 0 of the same length.
        assert!(matches!(
            counterexample_shift(&p, 2),
            Err(Error::Precondition(_))
        ));
        let neg =
            DirectPartition::from_lengths(0.0, &[(1.0 / 3.0, -1.0), (1.0, 1.2)], 0.01).unwrap();
        assert!(matches!(
            counterexample_shift(&neg, 0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn partition_validation() {
        assert!(DirectPartition::from_lengths(0.0, &[(1.0, 1.0)], 0.0).is_err());
        assert!(DirectPartition::from_lengths(0.0, &[(1.0, 1.0)], 1.0).is_err());
        let gap = vec![
            Interval::new(0.0, 1.0, 1.0).unwrap(),
            Interval::new(1.5, 2.0, 1.0).unwrap(),
        ];
        assert!(DirectPartition::new(gap, 0.1).is_err());
    }

    #[test]
    fn one_step_trisects_the_only_interval() {
        let run = run_direct(|x| x * x, 0.0, 3.0, 1e-4, 1).unwrap();
        let ivs = run.partition.intervals();
        assert_eq!(ivs.len(), 3);
        assert_eq!(run.trace[0].subdivided, vec![0]);
        assert_eq!(ivs[1].c, 1.5);
        assert!((ivs[0].c - 0.5).abs() < 1e-15 && (ivs[2].c - 2.5).abs() < 1e-15);
        assert_eq!(run.partition.f_min(), 0.25);
    }

    #[test]
    fn zero_budget_rejected() {
        assert!(run_direct(|x| x, 0.0, 1.0, 1e-4, 0).is_err());
    }

    #[test]
    fn trace_csv_format() {
        let run = run_direct(|x| (x - 0.3).powi(2) + 1.0, 0.0, 1.0, 1e-4, 2).unwrap();
        let mut buf = Vec::new();
        write_direct_trace_csv(&run.trace, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("iter,subdivided_indices,f_min,n_intervals")
        );
        assert!(lines.next().unwrap().starts_with("1,0,"));
        assert!(!text.contains('\r'));
    }
}
