//! Simulating composed adaptive training curves.
//!
//! The state of a composed run is its current error E. While shape P is
//! active, the run sits at effective compute `inverse(P, E)` and spending ΔC
//! moves it to `evaluate(P, inverse(P, E) + ΔC)`. On a switch to shape Q the
//! run resumes at effective compute `inverse(Q, E)` when E is inside Q's
//! window; otherwise the entry compute clamps to zero and the composed error
//! is `min(E, evaluate(Q, spent))` — which drops instantly to Q's start error
//! when Q starts below E, and holds flat at E forever when E is at or below
//! Q's asymptote. Under this model the compute to reach a target is the path
//! integral of |dC/dE|, which is what makes the greedy schedule optimal.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::law::{LawError, LawFamily, PowerLaw};
use crate::traverse::{
    partition, ErrorPartition, Schedule, TraverseError, Trigger, DEFAULT_GRID_POINTS,
};

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("schedule references shape '{0}' which is not in the family")]
    UnknownShape(String),
    #[error("start error {e_start} is at or below every asymptote in the family (min {min_asymptote}); no law can sit there")]
    StartBelowAsymptotes { e_start: f64, min_asymptote: f64 },
    #[error("need at least 2 samples, got {0}")]
    BadSampleCount(usize),
    #[error("compute budget must be nonnegative and finite, got {0}")]
    BadBudget(f64),
    #[error("target error must be finite, got {0}")]
    BadTarget(f64),
    #[error("schedule stalls on shape '{shape}' at error {error}: no further progress before the end condition")]
    Stalled { shape: String, error: f64 },
    #[error("target {target} is outside the partition domain [{e_end}, {e_start}]")]
    TargetOutsideDomain {
        target: f64,
        e_start: f64,
        e_end: f64,
    },
    #[error(
        "target {target} is unreachable: smallest reachable error is just above {min_asymptote}"
    )]
    UnreachableTarget { target: f64, min_asymptote: f64 },
    #[error("no static law reaches error {target}; savings against static training are undefined")]
    UndefinedSavings { target: f64 },
    #[error("frontier needs a nonempty compute grid of finite nonnegative values")]
    BadGrid,
    #[error("no compute-per-step entry for shape '{0}'")]
    MissingStepCost(String),
    #[error("compute per step for shape '{0}' must be positive and finite")]
    BadStepCost(String),
    #[error(
        "segment on shape '{shape}' rounds to zero steps; step indices must strictly increase"
    )]
    ZeroLengthSegment { shape: String },
    #[error(transparent)]
    Law(#[from] LawError),
    #[error(transparent)]
    Traverse(#[from] TraverseError),
}

/// When a simulated run stops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimEnd {
    /// Run until the composed error first reaches this level.
    TargetError(f64),
    /// Run until cumulative compute reaches this budget.
    TotalCompute(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub compute: f64,
    pub error: f64,
    pub shape: String,
}

/// A shape switch: the "cross" on a composed training curve.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMark {
    pub compute: f64,
    /// Error achieved at the moment of the switch.
    pub error: f64,
    pub from: String,
    pub to: String,
}

/// A simulated composed run: samples are ordered by compute, errors never
/// increase, and each sample's error equals the active law evaluated at that
/// law's effective compute (or the held error where the active law cannot
/// improve on it).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    samples: Vec<TrajectorySample>,
    transitions: Vec<TransitionMark>,
    total_compute: f64,
    final_error: f64,
}

impl Trajectory {
    pub fn samples(&self) -> &[TrajectorySample] {
        &self.samples
    }

    pub fn transitions(&self) -> &[TransitionMark] {
        &self.transitions
    }

    pub fn total_compute(&self) -> f64 {
        self.total_compute
    }

    pub fn final_error(&self) -> f64 {
        self.final_error
    }
}

/// One stretch of a walk on a single law.
struct Leg<'a> {
    law: &'a PowerLaw,
    /// Cumulative compute at entry / exit.
    t0: f64,
    t1: f64,
    /// Error achieved when the leg began (held if the law cannot beat it).
    e0: f64,
    /// Effective compute of the law at entry (0 when clamped).
    x0: f64,
}

impl Leg<'_> {
    fn error_at(&self, spent: f64) -> f64 {
        self.e0.min(self.law.eval_unchecked(self.x0 + spent))
    }
}

struct Walk<'a> {
    legs: Vec<Leg<'a>>,
    marks: Vec<TransitionMark>,
    total_compute: f64,
    final_error: f64,
}

/// Effective compute at which `law` resumes when entered at error `e`:
/// mid-curve when `e` is inside the window, clamped to 0 otherwise.
fn entry_compute(law: &PowerLaw, e: f64) -> f64 {
    if law.is_reachable(e) {
        law.inverse_unchecked(e)
    } else {
        0.0
    }
}

/// Compute spent on this leg until the composed error reaches `v`, or None
/// if the leg can never get there.
fn spent_to_error(law: &PowerLaw, e0: f64, x0: f64, v: f64) -> Option<f64> {
    let at_entry = e0.min(law.eval_unchecked(x0));
    if v >= at_entry {
        return Some(0.0);
    }
    // the held error e0 caps progress only from above; descent below needs
    // the law itself, which bottoms out at its asymptote
    if v > law.c() && e0 > law.c() {
        Some((law.inverse_unchecked(v) - x0).max(0.0))
    } else {
        None
    }
}

fn walk<'a>(
    family: &'a LawFamily,
    schedule: &Schedule,
    e_start: f64,
    end: SimEnd,
) -> Result<Walk<'a>, TrajectoryError> {
    for shape in schedule.shapes() {
        if family.get(shape).is_none() {
            return Err(TrajectoryError::UnknownShape(shape.to_string()));
        }
    }
    if !e_start.is_finite() || e_start <= family.min_asymptote() {
        return Err(TrajectoryError::StartBelowAsymptotes {
            e_start,
            min_asymptote: family.min_asymptote(),
        });
    }
    match end {
        SimEnd::TargetError(t) if !t.is_finite() => return Err(TrajectoryError::BadTarget(t)),
        SimEnd::TotalCompute(b) if !(b.is_finite() && b >= 0.0) => {
            return Err(TrajectoryError::BadBudget(b))
        }
        _ => {}
    }

    let mut legs: Vec<Leg<'a>> = Vec::new();
    let mut marks: Vec<TransitionMark> = Vec::new();
    let mut law = family.get(schedule.initial()).expect("checked above");
    let mut t = 0.0;
    let mut e = e_start;
    let mut pending = schedule.transitions().iter();
    let mut next = pending.next();

    loop {
        let x0 = entry_compute(law, e);
        let spent_end = match end {
            SimEnd::TargetError(target) => spent_to_error(law, e, x0, target),
            SimEnd::TotalCompute(budget) => Some((budget - t).max(0.0)),
        };
        let spent_trigger = next.and_then(|tr| match tr.trigger {
            Trigger::Error(v) => spent_to_error(law, e, x0, v),
            Trigger::Compute(v) => Some((v - t).max(0.0)),
        });

        // whichever event needs less compute wins; ties go to the trigger,
        // so at a shared threshold the switch still happens and the run
        // finishes on the new shape
        let end_first = match (spent_end, spent_trigger) {
            (Some(se), Some(st)) => se < st,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => {
                return Err(TrajectoryError::Stalled {
                    shape: law.shape_label().to_string(),
                    error: e,
                })
            }
        };

        if end_first {
            let se = spent_end.expect("end_first implies a finite end");
            let leg = Leg {
                law,
                t0: t,
                t1: t + se,
                e0: e,
                x0,
            };
            let final_error = leg.error_at(se);
            legs.push(leg);
            return Ok(Walk {
                legs,
                marks,
                total_compute: t + se,
                final_error,
            });
        }

        let st = spent_trigger.expect("!end_first implies a reachable trigger");
        let leg = Leg {
            law,
            t0: t,
            t1: t + st,
            e0: e,
            x0,
        };
        let e_switch = leg.error_at(st);
        legs.push(leg);
        let target = next.expect("trigger spent implies a transition");
        marks.push(TransitionMark {
            compute: t + st,
            error: e_switch,
            from: law.shape_label().to_string(),
            to: target.shape.clone(),
        });
        law = family.get(&target.shape).expect("checked above");
        t += st;
        e = e_switch;
        next = pending.next();
    }
}

/// Smallest number of decades below the total compute that sampling covers.
const SAMPLE_DECADES: f64 = 4.0;

/// Simulate the composed run of `schedule` over `family`, starting at error
/// `e_start` (clamped to the initial shape's start error) and stopping at
/// `end`.
///
/// Samples are the origin plus `sample_count - 1` points log-spaced over the
/// last four decades of cumulative compute, always including the endpoint.
/// A zero-compute run yields a single sample.
pub fn simulate(
    family: &LawFamily,
    schedule: &Schedule,
    e_start: f64,
    sample_count: usize,
    end: SimEnd,
) -> Result<Trajectory, TrajectoryError> {
    if sample_count < 2 {
        return Err(TrajectoryError::BadSampleCount(sample_count));
    }
    let w = walk(family, schedule, e_start, end)?;

    let mut samples = Vec::with_capacity(sample_count);
    if w.total_compute == 0.0 {
        samples.push(TrajectorySample {
            compute: 0.0,
            error: w.final_error,
            shape: w
                .legs
                .last()
                .expect("walk emits >= 1 leg")
                .law
                .shape_label()
                .to_string(),
        });
    } else {
        let sample_at = |compute: f64| -> TrajectorySample {
            // at a switch compute the new shape is the active one
            let idx = w
                .legs
                .partition_point(|l| l.t0 <= compute)
                .saturating_sub(1);
            let leg = &w.legs[idx];
            TrajectorySample {
                compute,
                error: leg.error_at((compute - leg.t0).clamp(0.0, leg.t1 - leg.t0)),
                shape: leg.law.shape_label().to_string(),
            }
        };
        samples.push(sample_at(0.0));
        let ln_hi = w.total_compute.ln();
        let ln_lo = ln_hi - SAMPLE_DECADES * std::f64::consts::LN_10;
        for i in 1..sample_count {
            let f = (i - 1) as f64 / (sample_count - 2).max(1) as f64;
            let c = if i == sample_count - 1 {
                w.total_compute
            } else {
                (ln_lo + f * (ln_hi - ln_lo)).exp()
            };
            samples.push(sample_at(c));
        }
    }

    Ok(Trajectory {
        samples,
        transitions: w.marks,
        total_compute: w.total_compute,
        final_error: w.final_error,
    })
}

/// Closed-form compute for the greedy descent described by `partition` to
/// reach `e_target`, summing per-segment inverse differences.
///
/// `e_target` must lie inside the partition's domain; targets below every
/// asymptote are reported as unreachable outright.
pub fn scheduled_compute(
    family: &LawFamily,
    partition: &ErrorPartition,
    e_target: f64,
) -> Result<f64, TrajectoryError> {
    if !e_target.is_finite() {
        return Err(TrajectoryError::BadTarget(e_target));
    }
    if e_target <= family.min_asymptote() {
        return Err(TrajectoryError::UnreachableTarget {
            target: e_target,
            min_asymptote: family.min_asymptote(),
        });
    }
    if e_target < partition.e_end() || e_target > partition.e_start() {
        return Err(TrajectoryError::TargetOutsideDomain {
            target: e_target,
            e_start: partition.e_start(),
            e_end: partition.e_end(),
        });
    }
    let mut total = 0.0;
    for seg in partition.segments() {
        if seg.e_high <= e_target {
            break;
        }
        let law = family
            .get(&seg.shape)
            .ok_or_else(|| TrajectoryError::UnknownShape(seg.shape.clone()))?;
        let lo = seg.e_low.max(e_target);
        total += law.inverse(lo)? - law.inverse_clamped(seg.e_high)?;
    }
    Ok(total)
}

/// One column of the compute-optimal picture at a fixed compute.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierPoint {
    pub compute: f64,
    /// Best error any single static law achieves at this compute.
    pub error: f64,
    /// Shape of that best static law.
    pub shape: String,
    /// Owning family's shape parameter; populated only for multi-family
    /// frontiers.
    pub family: Option<String>,
    /// Error the greedy composed schedule achieves at this compute (minimum
    /// across families). Pinned at the partition's domain floor once the
    /// schedule has descended as far as it can.
    pub scheduled_error: f64,
}

/// Greedy machinery for one family, reused across frontier grid points.
struct FamilyFrontier<'a> {
    family: &'a LawFamily,
    partition: ErrorPartition,
    max_compute: f64,
}

impl<'a> FamilyFrontier<'a> {
    fn new(family: &'a LawFamily) -> Result<Self, TrajectoryError> {
        // start where every law is live so a switch never lands above a start
        // error, keeping the dominance guarantee intact
        let e_start = family
            .laws()
            .iter()
            .map(|l| l.start_error())
            .fold(f64::INFINITY, f64::min);
        let partition = partition(
            family,
            (e_start, family.min_asymptote()),
            DEFAULT_GRID_POINTS,
            None,
        )?;
        let max_compute = scheduled_compute(family, &partition, partition.e_end())?;
        Ok(Self {
            family,
            partition,
            max_compute,
        })
    }

    /// Error of the greedy schedule after spending `compute`, by bisecting
    /// the closed-form compute-to-error map.
    fn scheduled_error(&self, compute: f64) -> f64 {
        if compute <= 0.0 {
            return self.partition.e_start();
        }
        if compute >= self.max_compute {
            return self.partition.e_end();
        }
        let mut hi = self.partition.e_start();
        let mut lo = self.partition.e_end();
        let tol = 1e-13 * (hi - lo);
        while hi - lo > tol {
            let mid = 0.5 * (hi + lo);
            let c = scheduled_compute(self.family, &self.partition, mid)
                .expect("mid stays inside the partition domain");
            if c > compute {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (hi + lo)
    }
}

/// Static and scheduled compute-optimal frontiers over one or more families.
///
/// For each grid compute, reports the best error any single law reaches
/// (with its shape, and family when more than one is given) alongside the
/// error of the greedy composed schedule, minimized across families.
pub fn frontier(
    families: &[LawFamily],
    compute_grid: &[f64],
) -> Result<Vec<FrontierPoint>, TrajectoryError> {
    if families.is_empty()
        || compute_grid.is_empty()
        || compute_grid.iter().any(|c| !c.is_finite() || *c < 0.0)
    {
        return Err(TrajectoryError::BadGrid);
    }
    let machinery: Vec<FamilyFrontier> = families
        .iter()
        .map(FamilyFrontier::new)
        .collect::<Result<_, _>>()?;

    let mut points = Vec::with_capacity(compute_grid.len());
    for &compute in compute_grid {
        let mut best: Option<(f64, &str, &str)> = None;
        for family in families {
            for law in family.laws() {
                let e = law.eval_unchecked(compute);
                let better = match best {
                    None => true,
                    Some((be, _, _)) => e < be,
                };
                if better {
                    best = Some((e, law.shape_label(), family.shape_parameter()));
                }
            }
        }
        let (error, shape, family_label) = best.expect("families are nonempty");
        let scheduled_error = machinery
            .iter()
            .map(|m| m.scheduled_error(compute))
            .fold(f64::INFINITY, f64::min);
        points.push(FrontierPoint {
            compute,
            error,
            shape: shape.to_string(),
            family: (families.len() > 1).then(|| family_label.to_string()),
            scheduled_error,
        });
    }
    Ok(points)
}

/// Fraction of compute the greedy schedule saves over the best single law
/// trained from scratch to `e_target`: `1 − scheduled / best_static`.
///
/// Zero when the target is the very top of the partition (both sides spend
/// nothing). Guaranteed nonnegative by greedy dominance, up to float noise.
pub fn savings(
    family: &LawFamily,
    partition: &ErrorPartition,
    e_target: f64,
) -> Result<f64, TrajectoryError> {
    let sched = scheduled_compute(family, partition, e_target)?;
    let static_best = family
        .laws()
        .iter()
        .filter(|l| l.is_reachable(e_target))
        .map(|l| l.inverse_unchecked(e_target))
        .fold(f64::INFINITY, f64::min);
    if static_best.is_infinite() {
        return Err(TrajectoryError::UndefinedSavings { target: e_target });
    }
    if sched == 0.0 {
        // degenerate target at the domain top: 0/0 is defined as no savings
        return Ok(0.0);
    }
    Ok(1.0 - sched / static_best)
}

/// Deploy a schedule as concrete step counts: walk the composed run, convert
/// each leg's compute into `ceil(compute / flops_per_step(shape))` training
/// steps, and report each switch as (new shape, completed steps before it).
pub fn to_step_schedule(
    schedule: &Schedule,
    family: &LawFamily,
    flops_per_step: &BTreeMap<String, f64>,
    e_start: f64,
) -> Result<Vec<(String, u64)>, TrajectoryError> {
    for shape in schedule.shapes() {
        match flops_per_step.get(shape) {
            None => return Err(TrajectoryError::MissingStepCost(shape.to_string())),
            Some(f) if !(f.is_finite() && *f > 0.0) => {
                return Err(TrajectoryError::BadStepCost(shape.to_string()))
            }
            Some(_) => {}
        }
    }
    let Some(last) = schedule.transitions().last() else {
        return Ok(Vec::new());
    };
    // end exactly at the last switch; the final shape's open-ended leg does
    // not need a step count
    let end = match last.trigger {
        Trigger::Error(v) => SimEnd::TargetError(v),
        Trigger::Compute(v) => SimEnd::TotalCompute(v),
    };
    let w = walk(family, schedule, e_start, end)?;

    let mut out = Vec::with_capacity(w.marks.len());
    let mut steps_done: u64 = 0;
    let mut prev_compute = 0.0;
    for mark in &w.marks {
        let leg_compute = mark.compute - prev_compute;
        let fps = flops_per_step[&mark.from];
        let steps = (leg_compute / fps).ceil();
        debug_assert!(steps >= 0.0 && steps < u64::MAX as f64);
        let steps = steps as u64;
        if steps == 0 && !out.is_empty() {
            return Err(TrajectoryError::ZeroLengthSegment {
                shape: mark.from.clone(),
            });
        }
        steps_done += steps;
        out.push((mark.to.clone(), steps_done));
        prev_compute = mark.compute;
    }
    Ok(out)
}
